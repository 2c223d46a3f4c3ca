//! Exact rational oracle for truncated birth-death chains.
//!
//! Every quantity is built from its own defining recurrence or sum, never
//! from the identities the library relies on, so agreement is evidence.

#![allow(dead_code)]

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

pub type Q = BigRational;

pub fn q(num: i64, den: i64) -> Q {
    Q::new(BigInt::from(num), BigInt::from(den))
}

pub fn qi(n: usize) -> Q {
    Q::from_integer(BigInt::from(n))
}

/// Exact value of a binary64 number.
pub fn qf(x: f64) -> Q {
    Q::from_float(x).expect("finite")
}

pub fn to_f64(x: &Q) -> f64 {
    x.to_f64().expect("representable")
}

/// `|a - b| / |b|`, or `|a|` when `b = 0`.
pub fn rel_diff(a: &Q, b: &Q) -> f64 {
    let d = (a - b).abs();
    if b.is_zero() {
        to_f64(&d)
    } else {
        to_f64(&(d / b.abs()))
    }
}

fn prefix_sums(x: &[Q]) -> Vec<Q> {
    let mut acc = Q::zero();
    x.iter()
        .map(|v| {
            acc += v;
            acc.clone()
        })
        .collect()
}

/// A chain on states `0..K`, reflecting at `K - 1`.
pub struct ExactChain {
    pub lambda: Vec<Q>,
    pub mu: Vec<Q>,
    pub cost: Vec<Q>,
    pub p: Vec<Q>,
    pub p_cum: Vec<Q>,
    /// `Σ_{j>n} p_j` within the truncated chain.
    pub p_bar: Vec<Q>,
    pub c_cum: Vec<Q>,
    pub c_bar: Vec<Q>,
    pub zeta: Q,
    /// From `λ_n T_n^+ = 1 + μ_n T_{n-1}^+`.
    pub t_up: Vec<Q>,
    /// From `λ_n H_n^+ = c_n + μ_n H_{n-1}^+`.
    pub h_up: Vec<Q>,
    /// `T_{n+1}^-` at index `n`, from `μ_n T_n^- = 1 + λ_n T_{n+1}^-`.
    pub t_down: Vec<Q>,
    /// `H_{n+1}^-` at index `n`.
    pub h_down: Vec<Q>,
    pub t_0n: Vec<Q>,
    pub h_0n: Vec<Q>,
    pub t_n0: Vec<Q>,
    pub h_n0: Vec<Q>,
}

impl ExactChain {
    pub fn new(lambda: Vec<Q>, mu: Vec<Q>, cost: Vec<Q>) -> Self {
        let k = lambda.len();
        let mut pi = vec![Q::one()];
        for n in 1..k {
            let v = &pi[n - 1] * &lambda[n - 1] / &mu[n];
            pi.push(v);
        }
        let total: Q = pi.iter().sum();
        let p: Vec<Q> = pi.iter().map(|x| x / &total).collect();
        let cp: Vec<Q> = p.iter().zip(&cost).map(|(a, b)| a * b).collect();
        let p_cum = prefix_sums(&p);
        let c_cum = prefix_sums(&cp);
        let zeta = c_cum[k - 1].clone();
        let p_bar: Vec<Q> = p_cum.iter().map(|x| Q::one() - x).collect();
        let c_bar: Vec<Q> = c_cum.iter().map(|x| &zeta - x).collect();

        let mut t_up = Vec::with_capacity(k);
        let mut h_up = Vec::with_capacity(k);
        for n in 0..k - 1 {
            let (t, h) = if n == 0 {
                (Q::one() / &lambda[0], &cost[0] / &lambda[0])
            } else {
                (
                    (Q::one() + &mu[n] * &t_up[n - 1]) / &lambda[n],
                    (&cost[n] + &mu[n] * &h_up[n - 1]) / &lambda[n],
                )
            };
            t_up.push(t);
            h_up.push(h);
        }

        // T_n^- for n = 1..K-1, from the reflecting end down.
        let mut tm = vec![Q::zero(); k];
        let mut hm = vec![Q::zero(); k];
        tm[k - 1] = Q::one() / &mu[k - 1];
        hm[k - 1] = &cost[k - 1] / &mu[k - 1];
        for n in (1..k - 1).rev() {
            tm[n] = (Q::one() + &lambda[n] * &tm[n + 1]) / &mu[n];
            hm[n] = (&cost[n] + &lambda[n] * &hm[n + 1]) / &mu[n];
        }
        let t_down: Vec<Q> = tm[1..].to_vec();
        let h_down: Vec<Q> = hm[1..].to_vec();

        let shift = |x: &[Q]| {
            let mut out = vec![Q::zero()];
            out.extend(prefix_sums(x));
            out
        };
        let t_0n = shift(&t_up);
        let h_0n = shift(&h_up);
        let t_n0 = shift(&t_down);
        let h_n0 = shift(&h_down);

        ExactChain {
            lambda,
            mu,
            cost,
            p,
            p_cum,
            p_bar,
            c_cum,
            c_bar,
            zeta,
            t_up,
            h_up,
            t_down,
            h_down,
            t_0n,
            h_0n,
            t_n0,
            h_n0,
        }
    }

    /// M/M/1+M with `λ = 9/10`, `μ = 1`, `θ = 1/2` and `c_n = nθ`.
    pub fn example(k: usize) -> Self {
        let lambda = vec![q(9, 10); k];
        let mu = (0..k).map(|n| if n == 0 { Q::zero() } else { q(1, 1) + qi(n) * q(1, 2) }).collect();
        let cost = (0..k).map(|n| qi(n) * q(1, 2)).collect();
        Self::new(lambda, mu, cost)
    }

    /// M/M/1 with `λ = 1`, `μ = 2`, `c_n = n`.
    pub fn mm1(k: usize) -> Self {
        let lambda = vec![q(1, 1); k];
        let mu = (0..k).map(|n| if n == 0 { Q::zero() } else { q(2, 1) }).collect();
        let cost = (0..k).map(qi).collect();
        Self::new(lambda, mu, cost)
    }

    pub fn len(&self) -> usize {
        self.lambda.len()
    }

    /// `λ_n p_n`.
    pub fn flow(&self, n: usize) -> Q {
        &self.lambda[n] * &self.p[n]
    }

    /// `φ_n = (C̄_n - ζ P̄_n) / (λ_n p_n)` for `n < K - 1`.
    pub fn phi(&self) -> Vec<Q> {
        (0..self.len() - 1)
            .map(|n| (&self.c_bar[n] - &self.zeta * &self.p_bar[n]) / self.flow(n))
            .collect()
    }

    /// `β_0 = -Σ P̄_n φ_n` and `β_n = β_0 + Σ_{j<n} φ_j`.
    pub fn beta(&self, phi: &[Q]) -> Vec<Q> {
        let mut b0 = Q::zero();
        for (n, f) in phi.iter().enumerate() {
            b0 -= &self.p_bar[n] * f;
        }
        let mut out = vec![b0.clone()];
        let mut run = b0;
        for f in phi {
            run += f;
            out.push(run.clone());
        }
        out
    }

    /// `2 Σ λ_n p_n φ_n²`.
    pub fn sigma2(&self, phi: &[Q]) -> Q {
        phi.iter()
            .enumerate()
            .map(|(n, f)| self.flow(n) * f * f)
            .sum::<Q>()
            * qi(2)
    }

    pub fn lambda_f64(&self) -> Vec<f64> {
        self.lambda.iter().map(to_f64).collect()
    }
}

use bdpoisson::model::{BirthDeathModel, LinearImmigration, MServer};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// One random preset model: M/M/1+M, an m-server queue, or linear immigration,
/// with parameters drawn so that the chain is ergodic.
pub fn random_preset(rng: &mut ChaCha8Rng) -> BirthDeathModel {
    match rng.gen_range(0..3) {
        0 => BirthDeathModel::mm1m(rng.gen_range(0.1..3.0), rng.gen_range(0.2..3.0), rng.gen_range(0.05..2.0)).unwrap(),
        1 => {
            let servers = rng.gen_range(1..=4usize);
            let mu = rng.gen_range(0.5..2.0);
            BirthDeathModel::mserver(MServer {
                lambda: rng.gen_range(0.2..0.95 * servers as f64 * mu),
                balking: vec![],
                servers,
                mu,
                theta: rng.gen_range(0.0..mu),
                abandon_in_service: false,
                abandonment_cost: rng.gen_range(0.0..2.0),
                holding: vec![rng.gen_range(0.0..1.0), rng.gen_range(0.0..2.0)],
            })
            .unwrap()
        }
        _ => {
            let death = rng.gen_range(0.5..2.0);
            BirthDeathModel::linear_immigration(LinearImmigration {
                birth: rng.gen_range(0.05..0.9 * death),
                immigration: rng.gen_range(0.1..3.0),
                death,
                holding: vec![rng.gen_range(0.0..1.0), rng.gen_range(0.0..2.0)],
            })
            .unwrap()
        }
    }
}

/// `count` reproducible random presets.
pub fn random_presets(seed: u64, count: usize) -> Vec<BirthDeathModel> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count).map(|_| random_preset(&mut rng)).collect()
}
