//! Solutions of Poisson's equation `λ_n φ_n - μ_n φ_{n-1} = ζ - c_n`.
//!
//! `φ_n = b_{n+1} - b_n` is the marginal relative cost. Four schemes are
//! provided: the exact closed form through passage quantities, the forward
//! recurrence (explosively unstable when `λ_n p_n → 0`), the backward
//! recurrence from a seeded frontier `N`, and the mixed scheme that runs
//! forward below the crossover `m` and backward above it.

use std::ops::{Add, Div, Mul, Sub};

use serde::Serialize;

use crate::chain::ChainTables;
use crate::error::{Error, Result};
use crate::numeric::{Dd, UNIT_ROUNDOFF};
use crate::passage::PassageTables;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Scheme {
    Exact,
    Forward,
    Backward,
    Mixed,
}

impl Scheme {
    pub fn as_str(self) -> &'static str {
        match self {
            Scheme::Exact => "exact",
            Scheme::Forward => "forward",
            Scheme::Backward => "backward",
            Scheme::Mixed => "mixed",
        }
    }
}

impl std::str::FromStr for Scheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "exact" => Ok(Scheme::Exact),
            "forward" => Ok(Scheme::Forward),
            "backward" => Ok(Scheme::Backward),
            "mixed" => Ok(Scheme::Mixed),
            _ => Err(Error::Config(format!("unknown scheme {s:?}"))),
        }
    }
}

/// A computed `(φ, b)` pair.
#[derive(Clone, Debug, PartialEq)]
pub struct PoissonSolution {
    pub scheme: Scheme,
    /// Right-hand-side constant used in place of `ζ`.
    pub z_input: f64,
    /// Frontier `N` (backward and mixed only).
    pub frontier: Option<usize>,
    /// Seed `φ_N^N` (backward and mixed only).
    pub phi_seed: Option<f64>,
    pub b0: f64,
    pub phi: Vec<f64>,
    /// `b_0 = b0`, `b_{n+1} = b_n + φ_n`; one longer than `phi`.
    pub b: Vec<f64>,
    /// `m = min{n : P̄_n < P_n}` (mixed only).
    pub crossover_m: Option<usize>,
    /// `M = min{n >= 1 : T_{n0} < T_{0n}}` (mixed only).
    pub crossover_big_m: Option<usize>,
}

/// `f_0 = (z - c_0)/λ_0`, `f_n = ((z - c_n) + μ_n f_{n-1}) / λ_n` for `n <= nmax`.
///
/// Generic so that tests can run the identical kernel in exact arithmetic.
pub fn forward_recurrence<T>(lambda: &[T], mu: &[T], cost: &[T], z: &T, nmax: usize) -> Vec<T>
where
    T: Clone + Add<Output = T> + Sub<Output = T> + Mul<Output = T> + Div<Output = T>,
{
    let mut f: Vec<T> = Vec::with_capacity(nmax + 1);
    f.push((z.clone() - cost[0].clone()) / lambda[0].clone());
    for n in 1..=nmax {
        let v = ((z.clone() - cost[n].clone()) + mu[n].clone() * f[n - 1].clone()) / lambda[n].clone();
        f.push(v);
    }
    f
}

/// `f_N = seed`, `f_{n-1} = ((c_n - z) + λ_n f_n) / μ_n` down to `n = 1`.
pub fn backward_recurrence<T>(lambda: &[T], mu: &[T], cost: &[T], z: &T, frontier: usize, seed: T) -> Vec<T>
where
    T: Clone + Add<Output = T> + Sub<Output = T> + Mul<Output = T> + Div<Output = T>,
{
    let mut f: Vec<T> = vec![seed; frontier + 1];
    for n in (1..=frontier).rev() {
        f[n - 1] = ((cost[n].clone() - z.clone()) + lambda[n].clone() * f[n].clone()) / mu[n].clone();
    }
    f
}

/// `b_0 = b0`, `b_{n+1} = b_n + φ_n`, with the running sum kept in double-double.
pub fn accumulate_b(phi: &[f64], b0: f64) -> Vec<f64> {
    let mut b = Vec::with_capacity(phi.len() + 1);
    let mut acc = Dd::from(b0);
    b.push(b0);
    for &f in phi {
        acc += f;
        b.push(acc.to_f64());
    }
    b
}

fn check_frontier(tables: &ChainTables, n: usize) -> Result<()> {
    if n > tables.n_star {
        Err(Error::FrontierTooSmall {
            requested: n,
            available: tables.n_star,
        })
    } else {
        Ok(())
    }
}

/// Exact `φ` over `0..=n_star` from the tables' own `ζ`.
///
/// `φ_n = (ζ P_n - C_n)/(λ_n p_n)` below the crossover `m` and the
/// tail form `(C̄_n - ζ P̄_n)/(λ_n p_n)` from `m` on, where the head
/// difference would cancel.
pub fn solve_exact(tables: &ChainTables, b0: f64) -> Result<PoissonSolution> {
    let zeta = tables.zeta_dd();
    if !zeta.is_finite() {
        return Err(Error::MissingZeta);
    }
    let m = crossover_m(tables);
    let phi: Vec<f64> = (0..tables.len())
        .map(|n| {
            let num = if n < m {
                zeta * tables.dd.p_cum[n] - tables.dd.c_cum[n]
            } else {
                tables.dd.c_bar[n] - zeta * tables.dd.p_bar[n]
            };
            (num / tables.flow_dd(n)).to_f64()
        })
        .collect();
    let b = accumulate_b(&phi, b0);
    Ok(PoissonSolution {
        scheme: Scheme::Exact,
        z_input: zeta.to_f64(),
        frontier: None,
        phi_seed: None,
        b0,
        phi,
        b,
        crossover_m: None,
        crossover_big_m: None,
    })
}

/// Forward recurrence with `z` in place of `ζ`, for `n <= nmax`.
pub fn solve_forward(tables: &ChainTables, z: f64, nmax: usize, b0: f64) -> Result<PoissonSolution> {
    check_frontier(tables, nmax)?;
    let phi = forward_recurrence(&tables.lambda, &tables.mu, &tables.cost, &z, nmax);
    let b = accumulate_b(&phi, b0);
    Ok(PoissonSolution {
        scheme: Scheme::Forward,
        z_input: z,
        frontier: None,
        phi_seed: None,
        b0,
        phi,
        b,
        crossover_m: None,
        crossover_big_m: None,
    })
}

/// Backward recurrence from `φ_N^N = seed`.
pub fn solve_backward(tables: &ChainTables, z: f64, frontier: usize, seed: f64, b0: f64) -> Result<PoissonSolution> {
    check_frontier(tables, frontier)?;
    if !seed.is_finite() {
        return Err(Error::Config(format!("backward seed {seed} is not finite")));
    }
    let phi = backward_recurrence(&tables.lambda, &tables.mu, &tables.cost, &z, frontier, seed);
    let b = accumulate_b(&phi, b0);
    Ok(PoissonSolution {
        scheme: Scheme::Backward,
        z_input: z,
        frontier: Some(frontier),
        phi_seed: Some(seed),
        b0,
        phi,
        b,
        crossover_m: None,
        crossover_big_m: None,
    })
}

/// `m = min{n : P̄_n < P_n}`; ties go to the forward side. `len` if never.
pub fn crossover_m(tables: &ChainTables) -> usize {
    (0..tables.len())
        .find(|&n| tables.dd.p_bar[n] < tables.dd.p_cum[n])
        .unwrap_or(tables.len())
}

/// `M = min{n >= 1 : T_{n0} < T_{0n}}`, if reached within the tables.
pub fn crossover_big_m(passage: &PassageTables) -> Option<usize> {
    (1..passage.len()).find(|&n| passage.t_n0[n] < passage.t_0n[n])
}

/// Forward below `m`, backward from `N` at and above `m`; `b` switches at `M`.
pub fn solve_mixed(
    tables: &ChainTables,
    passage: &PassageTables,
    z: f64,
    frontier: usize,
    seed: f64,
    b0: f64,
) -> Result<PoissonSolution> {
    let fwd = solve_forward(tables, z, frontier, b0)?;
    let bwd = solve_backward(tables, z, frontier, seed, b0)?;
    let m = crossover_m(tables);
    let big_m = crossover_big_m(passage);
    if let Some(bm) = big_m {
        if m > bm {
            return Err(Error::CrossoverOrder { m, big_m: bm });
        }
    }
    let phi: Vec<f64> = (0..=frontier)
        .map(|n| if n < m { fwd.phi[n] } else { bwd.phi[n] })
        .collect();
    let switch = big_m.unwrap_or(usize::MAX);
    let b: Vec<f64> = (0..=frontier + 1)
        .map(|n| if n < switch { fwd.b[n] } else { bwd.b[n] })
        .collect();
    Ok(PoissonSolution {
        scheme: Scheme::Mixed,
        z_input: z,
        frontier: Some(frontier),
        phi_seed: Some(seed),
        b0,
        phi,
        b,
        crossover_m: Some(m),
        crossover_big_m: big_m,
    })
}

/// Smallest `N >= report_max` with `λ_N p_N T_{N0} <= u λ_r p_r`, `r = report_max`.
///
/// With a bounded seed error, this keeps the seed's contribution to the
/// error at row `r` below the unit roundoff.
pub fn default_frontier(tables: &ChainTables, passage: &PassageTables, report_max: usize) -> Result<usize> {
    check_frontier(tables, report_max)?;
    let target = UNIT_ROUNDOFF * tables.flow(report_max);
    (report_max..tables.len())
        .find(|&n| tables.flow(n) * passage.t_n0[n] <= target)
        .ok_or(Error::NoSafeFrontier {
            report_max,
            n_star: tables.n_star,
        })
}

/// Largest `r <= cap` that [`default_frontier`] can serve.
///
/// Fast-decaying chains reach the truncation frontier before the seed term
/// has fallen by `u` relative to row `cap`; their reported range shrinks instead.
pub fn default_report_max(tables: &ChainTables, passage: &PassageTables, cap: usize) -> Result<usize> {
    let top = cap.min(tables.n_star);
    (0..=top)
        .rev()
        .find(|&r| default_frontier(tables, passage, r).is_ok())
        .ok_or(Error::NoSafeFrontier {
            report_max: 0,
            n_star: tables.n_star,
        })
}
