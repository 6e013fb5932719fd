//! Derivative-free one-dimensional maximization.

/// Golden-section search for the maximum of `g` on `[lo, hi]`, assumed
/// unimodal there. Returns the best point evaluated and its value; the
/// endpoints themselves are never evaluated.
pub fn golden_max<G: FnMut(f64) -> f64>(mut g: G, lo: f64, hi: f64, steps: usize) -> (f64, f64) {
    let inv_phi = 0.5 * (5f64.sqrt() - 1.0);
    let (mut a, mut b) = (lo, hi);
    let mut c = b - inv_phi * (b - a);
    let mut e = a + inv_phi * (b - a);
    let mut fc = g(c);
    let mut fe = g(e);
    let mut best = if fe > fc { (e, fe) } else { (c, fc) };
    for _ in 0..steps {
        if fc >= fe {
            b = e;
            e = c;
            fe = fc;
            c = b - inv_phi * (b - a);
            fc = g(c);
            if fc > best.1 {
                best = (c, fc);
            }
        } else {
            a = c;
            c = e;
            fc = fe;
            e = a + inv_phi * (b - a);
            fe = g(e);
            if fe > best.1 {
                best = (e, fe);
            }
        }
    }
    best
}
