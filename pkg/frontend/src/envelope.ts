/** Squared modulus of the Gaussian wave-packet amplitude:
 *  |xi(t)|^2 = sqrt(omega^2 / (2 pi)) * exp(-omega^2 (t - t0)^2 / 2).
 *  Normalized so it integrates to one over the real line. */
export function envelopeSq(t: number, omega: number, t0: number): number {
  const u = t - t0;
  return Math.sqrt((omega * omega) / (2.0 * Math.PI)) *
    Math.exp(-0.5 * omega * omega * u * u);
}
