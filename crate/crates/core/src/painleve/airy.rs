//! The Airy function by its Maclaurin series in big precision.
//!
//! `Ai(x) = c₁ f(x) − c₂ g(x)` with `c₁ = Ai(0) = 3^{−2/3}/Γ(2/3)`,
//! `c₂ = −Ai′(0) = 3^{−1/3}/Γ(1/3)` and
//! `f = Σ a_k x^{3k}`, `a_k = a_{k−1}/((3k−1)3k)`,
//! `g = Σ b_k x^{3k+1}`, `b_k = b_{k−1}/(3k(3k+1))`.
//! On `|x| ≤ 16` the terms peak near `e^{(2/3)|x|^{3/2}}`; 320 bits leave
//! ample room for the cancellation at positive `x`.

use rug::ops::Pow;
use rug::Float;

const PREC: u32 = 320;

fn constants() -> (Float, Float) {
    let three = Float::with_val(PREC, 3);
    let g23 = Float::with_val(PREC, Float::with_val(PREC, 2) / 3u32).gamma();
    let g13 = Float::with_val(PREC, Float::with_val(PREC, 1) / 3u32).gamma();
    let c1 = Float::with_val(PREC, three.clone().pow(Float::with_val(PREC, -2) / 3u32)) / g23;
    let c2 = Float::with_val(PREC, three.pow(Float::with_val(PREC, -1) / 3u32)) / g13;
    (c1, c2)
}

/// Big-precision `(Ai(x), Ai′(x), ∫_0^x Ai)`.
pub fn airy_big(x: f64) -> (Float, Float, Float) {
    assert!(x.abs() <= 40.0, "Airy series used outside its design range");
    let (c1, c2) = constants();
    if x == 0.0 {
        return (c1, -c2, Float::with_val(PREC, 0));
    }
    let xb = Float::with_val(PREC, x);
    let x3 = Float::with_val(PREC, xb.clone().square() * &xb);
    // f and its derivative and antiderivative, term by term.
    let mut f = Float::with_val(PREC, 0);
    let mut fp = Float::with_val(PREC, 0);
    let mut fi = Float::with_val(PREC, 0);
    let mut g = Float::with_val(PREC, 0);
    let mut gp = Float::with_val(PREC, 0);
    let mut gi = Float::with_val(PREC, 0);
    // a_k x^{3k} and b_k x^{3k+1}.
    let mut ta = Float::with_val(PREC, 1);
    let mut tb = xb.clone();
    let tiny = Float::with_val(PREC, 2).pow(-(PREC as i32) - 8);
    let mut k: u32 = 0;
    loop {
        f += &ta;
        g += &tb;
        fi += Float::with_val(PREC, &ta * &xb) / (3 * k + 1);
        gi += Float::with_val(PREC, &tb * &xb) / (3 * k + 2);
        fp += Float::with_val(PREC, &ta * (3 * k)) / &xb;
        gp += Float::with_val(PREC, &tb * (3 * k + 1)) / &xb;
        k += 1;
        ta *= &x3;
        ta /= (3 * k - 1) * (3 * k);
        tb *= &x3;
        tb /= (3 * k) * (3 * k + 1);
        if k > 4 && Float::with_val(PREC, ta.abs_ref()) < tiny && Float::with_val(PREC, tb.abs_ref()) < tiny {
            break;
        }
    }
    let ai = Float::with_val(PREC, &c1 * &f) - Float::with_val(PREC, &c2 * &g);
    let aip = Float::with_val(PREC, &c1 * &fp) - Float::with_val(PREC, &c2 * &gp);
    let aii = Float::with_val(PREC, &c1 * &fi) - Float::with_val(PREC, &c2 * &gi);
    (ai, aip, aii)
}

/// `(Ai(x), Ai′(x))`.
pub fn airy(x: f64) -> (f64, f64) {
    let (a, d, _) = airy_big(x);
    (a.to_f64(), d.to_f64())
}

/// `∫_x^∞ Ai(s)² ds = Ai′(x)² − x Ai(x)²`.
pub fn airy_sq_tail(x: f64) -> f64 {
    let (a, d, _) = airy_big(x);
    let v = Float::with_val(PREC, d.square_ref()) - Float::with_val(PREC, a.square_ref()) * x;
    v.to_f64()
}

/// `∫_x^∞ Ai′(s)² ds = −⅓[x Ai′² − x² Ai² + 2 Ai Ai′]`.
pub fn airy_prime_sq_tail(x: f64) -> f64 {
    let (a, d, _) = airy_big(x);
    let xb = Float::with_val(PREC, x);
    let t1 = Float::with_val(PREC, d.square_ref()) * &xb;
    let t2 = Float::with_val(PREC, a.square_ref()) * Float::with_val(PREC, xb.square_ref());
    let t3 = Float::with_val(PREC, &a * &d) * 2u32;
    (-(t1 - t2 + t3) / 3u32).to_f64()
}

/// `∫_x^∞ Ai(s) ds = ⅓ − ∫_0^x Ai`.
pub fn airy_tail(x: f64) -> f64 {
    let (_, _, i) = airy_big(x);
    (Float::with_val(PREC, 1) / 3u32 - i).to_f64()
}
