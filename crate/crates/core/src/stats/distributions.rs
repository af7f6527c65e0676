//! Distribution tails used by the tests. The studentized range inner
//! integral follows Copenhaver–Holland (as in R's `ptukey`).

use statrs::distribution::{ChiSquared, ContinuousCDF, FisherSnedecor, Normal, StudentsT};
use statrs::function::gamma::ln_gamma;

use crate::error::{Error, Result};

fn dist_err(e: impl std::fmt::Display) -> Error {
    Error::Validation(format!("distribution parameters: {e}"))
}

pub fn normal_cdf(x: f64) -> f64 {
    Normal::standard().cdf(x)
}

/// Upper tail `P(F > f)`.
pub fn f_sf(f: f64, df1: f64, df2: f64) -> Result<f64> {
    if f.is_infinite() {
        return Ok(0.0);
    }
    Ok(FisherSnedecor::new(df1, df2).map_err(dist_err)?.sf(f.max(0.0)))
}

/// Two-sided `P(|T| > |t|)`.
pub fn t_two_sided(t: f64, df: f64) -> Result<f64> {
    if t.is_infinite() {
        return Ok(0.0);
    }
    Ok((2.0 * StudentsT::new(0.0, 1.0, df).map_err(dist_err)?.sf(t.abs())).min(1.0))
}

pub fn t_cdf(t: f64, df: f64) -> Result<f64> {
    Ok(StudentsT::new(0.0, 1.0, df).map_err(dist_err)?.cdf(t))
}

/// Upper tail `P(χ² > x)`.
pub fn chi2_sf(x: f64, df: f64) -> Result<f64> {
    Ok(ChiSquared::new(df).map_err(dist_err)?.sf(x.max(0.0)))
}

const XLEG: [f64; 6] = [
    0.981560634246719250690549090149,
    0.904117256370474856678465866119,
    0.769902674194304687036893833213,
    0.587317954286617447296702418941,
    0.367831498998180193752691536644,
    0.125233408511468915472441369464,
];
const ALEG: [f64; 6] = [
    0.047175336386511827194615961485,
    0.106939325995318430960254718194,
    0.160078328543346226334652529543,
    0.203167426723065921749064455810,
    0.233492536538354808760849898925,
    0.249147045813402785000562436043,
];
const XLEGQ: [f64; 8] = [
    0.989400934991649932596154173450,
    0.944575023073232576077988415535,
    0.865631202387831743880467897712,
    0.755404408355003033895101194847,
    0.617876244402643748446671764049,
    0.458016777657227386342419442984,
    0.281603550779258913230460501460,
    0.950125098376374401853193354250e-1,
];
const ALEGQ: [f64; 8] = [
    0.271524594117540948517805724560e-1,
    0.622535239386478928628438369944e-1,
    0.951585116824927848099251076022e-1,
    0.124628971255533872052476282192,
    0.149595988816576732081501730547,
    0.169156519395002538189312079030,
    0.182603415044923588866763667969,
    0.189450610455068496285396723208,
];

/// `P(range of cc standard normals < w)` raised to `rr`.
fn wprob(w: f64, rr: f64, cc: f64) -> f64 {
    const C1: f64 = -30.0;
    const C3: f64 = 60.0;
    const BB: f64 = 8.0;
    const WLAR: f64 = 3.0;
    let qsqz = w * 0.5;
    if qsqz >= BB {
        return 1.0;
    }
    let mut pr_w = 2.0 * normal_cdf(qsqz) - 1.0;
    pr_w = if pr_w >= 1.0 { 1.0 } else { pr_w.powf(cc) };
    let wincr = if w > WLAR { 2.0 } else { 3.0 };
    let mut blb = qsqz;
    let binc = (BB - qsqz) / wincr;
    let mut bub = blb + binc;
    let mut einsum = 0.0;
    let cc1 = cc - 1.0;
    for _ in 0..wincr as usize {
        let mut elsum = 0.0;
        let a = 0.5 * (bub + blb);
        let b = 0.5 * (bub - blb);
        for jj in 1..=12usize {
            let (j, xx) = if jj > 6 { (12 - jj + 1, XLEG[12 - jj]) } else { (jj, -XLEG[jj - 1]) };
            let ac = a + b * xx;
            let qexpo = ac * ac;
            if qexpo > C3 {
                break;
            }
            let pplus = 2.0 * normal_cdf(ac);
            let pminus = 2.0 * normal_cdf(ac - w);
            let rinsum = pplus * 0.5 - pminus * 0.5;
            if rinsum >= (C1 / cc1).exp() {
                elsum += ALEG[j - 1] * (-(0.5 * qexpo)).exp() * rinsum.powf(cc1);
            }
        }
        elsum *= 2.0 * b * cc / (2.0 * std::f64::consts::PI).sqrt();
        einsum += elsum;
        blb = bub;
        bub += binc;
    }
    pr_w += einsum;
    if pr_w <= (C1 / rr).exp() {
        return 0.0;
    }
    pr_w.powf(rr).min(1.0)
}

/// CDF of the studentized range for `k` means and `df` error degrees of
/// freedom (`f64::INFINITY` for the normal limit).
pub fn ptukey(q: f64, k: usize, df: f64) -> Result<f64> {
    if k < 2 || !(df >= 2.0) {
        return Err(Error::Validation(format!("ptukey needs k >= 2 and df >= 2 (k={k}, df={df})")));
    }
    if q <= 0.0 {
        return Ok(0.0);
    }
    if q.is_infinite() {
        return Ok(1.0);
    }
    let cc = k as f64;
    if df > 25_000.0 {
        return Ok(wprob(q, 1.0, cc));
    }
    // P(Q < q) = ∫ wprob(q·s) f(s) ds with s² ~ χ²_df / df, integrated by
    // composite Gauss–Legendre over the region holding the density's mass.
    let half = df * 0.5;
    let ln_c = std::f64::consts::LN_2 + half * half.ln() - ln_gamma(half);
    let ln_f = |s: f64| ln_c + (df - 1.0) * s.ln() - half * s * s;
    let mode = ((df - 1.0) / df).sqrt();
    let peak = ln_f(mode);
    let edge = |mut inside: f64, mut outside: f64| {
        for _ in 0..100 {
            let mid = 0.5 * (inside + outside);
            if ln_f(mid) - peak > -45.0 {
                inside = mid;
            } else {
                outside = mid;
            }
        }
        outside
    };
    let lo = edge(mode, 0.0);
    let hi = edge(mode, mode + 10.0);
    const PANELS: usize = 16;
    let width = (hi - lo) / PANELS as f64;
    let mut total = 0.0;
    for panel in 0..PANELS {
        let centre = lo + (panel as f64 + 0.5) * width;
        for (x, w) in XLEGQ.iter().zip(&ALEGQ) {
            for s in [centre - 0.5 * width * x, centre + 0.5 * width * x] {
                total += w * 0.5 * width * wprob(q * s, 1.0, cc) * ln_f(s).exp();
            }
        }
    }
    Ok(total.clamp(0.0, 1.0))
}

/// Quantile of the studentized range: Illinois-modified regula falsi on
/// [`ptukey`].
pub fn qtukey(p: f64, k: usize, df: f64) -> Result<f64> {
    if !(0.0..1.0).contains(&p) {
        return Err(Error::Validation(format!("probability {p} outside [0, 1)")));
    }
    if p == 0.0 {
        return Ok(0.0);
    }
    let g = |q: f64| -> Result<f64> { Ok(ptukey(q, k, df)? - p) };
    let (mut a, mut fa) = (0.0, -p);
    let (mut b, mut fb) = (8.0, g(8.0)?);
    while fb < 0.0 {
        a = b;
        fa = fb;
        b *= 2.0;
        if b > 1e6 {
            return Err(Error::Degenerate("studentized range quantile did not bracket".into()));
        }
        fb = g(b)?;
    }
    let mut side = 0i8;
    for _ in 0..100 {
        let c = (a * fb - b * fa) / (fb - fa);
        let fc = g(c)?;
        if fc.abs() < 1e-13 || (b - a).abs() < 1e-12 * c.max(1.0) {
            return Ok(c);
        }
        if fc * fb > 0.0 {
            b = c;
            fb = fc;
            if side == -1 {
                fa *= 0.5;
            }
            side = -1;
        } else {
            a = c;
            fa = fc;
            if side == 1 {
                fb *= 0.5;
            }
            side = 1;
        }
    }
    Ok((a * fb - b * fa) / (fb - fa))
}
