//! The asymptotic variance σ² = ∫∫ (s∧t - st) J(s) J(t) dg(s) dg(t) and CLT
//! intervals.

use serde::{Deserialize, Serialize};

use crate::distributions::{DrawRole, ModelSpec};
use crate::error::{Error, Result};
use crate::kernel::{KernelCdf, KernelEstimatorConfig};
use crate::riskmeasure::spectrum::Spectrum;
use crate::stats::normal_quantile;

pub const DEFAULT_VARIANCE_GRID: usize = 800;
pub const DEFAULT_CLIP: f64 = 1e-6;

type PairFn<'a> = Box<dyn Fn(f64, f64) -> f64 + Send + Sync + 'a>;

/// Weight J and quantile transform g, both called as (u, 1 - u).
pub struct AsymptoticSpec<'a> {
    pub j: PairFn<'a>,
    pub g: PairFn<'a>,
    pub clip: f64,
}

impl<'a> AsymptoticSpec<'a> {
    pub fn new(
        j: impl Fn(f64, f64) -> f64 + Send + Sync + 'a,
        g: impl Fn(f64, f64) -> f64 + Send + Sync + 'a,
    ) -> Self {
        AsymptoticSpec { j: Box::new(j), g: Box::new(g), clip: DEFAULT_CLIP }
    }

    /// J = φ and g the model's loss quantile function.
    pub fn for_model(model: &'a ModelSpec, spectrum: &'a dyn Spectrum, role: DrawRole) -> Result<Self> {
        model.quantile(0.5)?;
        Ok(AsymptoticSpec::new(
            move |u, c| spectrum.phi_pair(u, c),
            move |u, c| {
                let q = match role {
                    DrawRole::Loss => model.quantile_pair(u, c),
                    DrawRole::Return => model.quantile_pair(c, u).map(|q| -q),
                };
                q.unwrap_or(f64::NAN)
            },
        ))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AsymptoticVariance {
    /// Value on the doubled grid.
    pub value: f64,
    /// Value on the base grid.
    pub coarse: f64,
    pub difference: f64,
    pub grid: usize,
    /// ∫ J g on the doubled grid.
    pub mu: f64,
    /// True when g was non-finite at an endpoint and evaluated at the clip
    /// distance instead.
    pub clipped: bool,
}

/// Midpoint tensor rule with Stieltjes increments dg over `grid` cells,
/// repeated on 2·grid cells.
///
/// The partition is graded toward both ends, u_k = P(k/G) with the quintic
/// smoothstep P, because quantile transforms are unbounded there and a
/// uniform partition converges only like h·√log(1/h).
pub fn asymptotic_variance(spec: &AsymptoticSpec<'_>, grid: usize) -> Result<AsymptoticVariance> {
    if grid < 2 {
        return Err(Error::param("variance grid needs at least 2 cells"));
    }
    let run = |cells: usize| -> Result<(f64, f64, bool)> {
        let (us, cs) = graded_mesh(cells);
        let (gs, clipped) = evaluate_g(&us, &cs, spec.clip, |u, c| (spec.g)(u, c))?;
        let (v, mu) = tensor_midpoint(&us, &cs, &gs, |u, c| (spec.j)(u, c));
        Ok((v, mu, clipped))
    };
    let (coarse, _, clip_a) = run(grid)?;
    let (value, mu, clip_b) = run(2 * grid)?;
    Ok(AsymptoticVariance {
        value,
        coarse,
        difference: value - coarse,
        grid,
        mu,
        clipped: clip_a || clip_b,
    })
}

fn smoothstep(t: f64) -> f64 {
    t * t * t * (10.0 + t * (-15.0 + 6.0 * t))
}

/// Nodes u_0 = 0 < … < u_G = 1 and their complements, symmetric about 1/2.
pub(crate) fn graded_mesh(cells: usize) -> (Vec<f64>, Vec<f64>) {
    let gf = cells as f64;
    let mut us = vec![0.0; cells + 1];
    let mut cs = vec![0.0; cells + 1];
    for k in 0..=cells {
        let near = k.min(cells - k);
        let p = smoothstep(near as f64 / gf);
        if 2 * k <= cells {
            us[k] = p;
            cs[k] = 1.0 - p;
        } else {
            us[k] = 1.0 - p;
            cs[k] = p;
        }
    }
    (us, cs)
}

/// g at the mesh nodes. A non-finite endpoint value is replaced by g at the
/// clip distance ε, or by the neighbouring node value when that node is
/// already closer to the end than ε.
fn evaluate_g(
    us: &[f64],
    cs: &[f64],
    clip: f64,
    g: impl Fn(f64, f64) -> f64,
) -> Result<(Vec<f64>, bool)> {
    let last = us.len() - 1;
    let mut clipped = false;
    let mut gs = Vec::with_capacity(us.len());
    for k in 0..=last {
        let v = g(us[k], cs[k]);
        if v.is_finite() {
            gs.push(v);
            continue;
        }
        if k == 0 || k == last {
            clipped = true;
            let (inner_dist, inner) = if k == 0 { (us[1], (us[1], cs[1])) } else { (cs[last - 1], (us[last - 1], cs[last - 1])) };
            let v = if inner_dist > clip {
                if k == 0 { g(clip, 1.0 - clip) } else { g(1.0 - clip, clip) }
            } else {
                g(inner.0, inner.1)
            };
            if v.is_finite() {
                gs.push(v);
                continue;
            }
        }
        return Err(Error::param(format!("quantile transform is not finite at u = {}", us[k])));
    }
    Ok((gs, clipped))
}

/// σ² = 2 Σ_{i<j} m_i(1-m_j) a_i a_j + Σ m_i(1-m_i) a_i² with a_i = J(m_i) Δg_i,
/// accumulated in O(G). Also returns μ = ∫ J g du by the same rule.
fn tensor_midpoint(us: &[f64], cs: &[f64], gs: &[f64], j: impl Fn(f64, f64) -> f64) -> (f64, f64) {
    let mut prefix = 0.0;
    let mut cross = 0.0;
    let mut diag = 0.0;
    let mut mu = 0.0;
    for i in 0..us.len() - 1 {
        let m = 0.5 * (us[i] + us[i + 1]);
        let mc = 0.5 * (cs[i] + cs[i + 1]);
        let jm = j(m, mc);
        if jm == 0.0 {
            continue;
        }
        let a = jm * (gs[i + 1] - gs[i]);
        cross += mc * a * prefix;
        diag += m * mc * a * a;
        prefix += m * a;
        mu += jm * 0.5 * (gs[i] + gs[i + 1]) * (us[i + 1] - us[i]);
    }
    ((2.0 * cross + diag).max(0.0), mu)
}

/// Plug-in σ² using the kernel quantile function of the sample as g.
pub fn plug_in_variance(
    f: &KernelCdf,
    spectrum: &dyn Spectrum,
    config: &KernelEstimatorConfig,
    grid: usize,
) -> Result<AsymptoticVariance> {
    if grid < 2 {
        return Err(Error::param("variance grid needs at least 2 cells"));
    }
    let run = |cells: usize| -> Result<(f64, f64)> {
        let (us, cs) = graded_mesh(cells);
        // interior nodes plus the clipped ends, inverted in one sweep
        let e = DEFAULT_CLIP;
        let lo_u = if us[1] > e { e } else { us[1] };
        let hi_c = if cs[cells - 1] > e { e } else { cs[cells - 1] };
        let mut qu: Vec<f64> = us.clone();
        let mut qc: Vec<f64> = cs.clone();
        qu[0] = lo_u;
        qc[0] = 1.0 - lo_u;
        qu[cells] = 1.0 - hi_c;
        qc[cells] = hi_c;
        let gs = f.quantiles_sorted(&qu, &qc, config.inversion_tol, config.inversion_max_iter)?;
        Ok(tensor_midpoint(&us, &cs, &gs, |u, c| spectrum.phi_pair(u, c)))
    };
    let (coarse, _) = run(grid)?;
    let (value, mu) = run(2 * grid)?;
    Ok(AsymptoticVariance { value, coarse, difference: value - coarse, grid, mu, clipped: true })
}

/// point ± z_{(1+level)/2} √(σ²/n).
pub fn clt_interval(point: f64, sigma2: f64, n: usize, level: f64) -> Result<(f64, f64)> {
    if !(sigma2 >= 0.0) || n == 0 || !(level > 0.0 && level < 1.0) {
        return Err(Error::param("clt_interval needs sigma2 >= 0, n >= 1 and 0 < level < 1"));
    }
    let half = normal_quantile(0.5 + 0.5 * level) * (sigma2 / n as f64).sqrt();
    Ok((point - half, point + half))
}
