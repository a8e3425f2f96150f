//! Tail counts over prime windows, coprimality densities, equidistribution
//! of residues, and the plain-box baseline.

use std::collections::BTreeMap;
use std::sync::OnceLock;

use rayon::prelude::*;

use crate::arith::Factorizer;
use crate::error::{Error, Result};
use crate::forms::AffineQuadricInstance;
use crate::lattice::{self, GcdTable, HeightWindow, Norm, PrimeWindow};
use crate::localcount::{self, ClosedSubsetSpec, PurityProduct};
use crate::poly::IntPolynomial;

pub const DEFAULT_ALPHA: f64 = 0.25;

#[derive(Debug, Clone)]
pub struct SieveExperiment {
    spec: ClosedSubsetSpec,
    t_grid: Vec<u64>,
    m_grid: Vec<u128>,
    alpha: f64,
    norm: Norm,
    factorizer: Factorizer,
    table: OnceLock<GcdTable>,
}

fn increasing<T: PartialOrd>(v: &[T]) -> bool {
    !v.is_empty() && v.windows(2).all(|w| w[0] < w[1])
}

impl SieveExperiment {
    pub fn new(spec: ClosedSubsetSpec, t_grid: Vec<u64>, m_grid: Vec<u128>, alpha: f64) -> Result<Self> {
        if !increasing(&t_grid) || t_grid[0] == 0 {
            return Err(Error::InvalidArgument("T grid must be positive and increasing".into()));
        }
        if !increasing(&m_grid) || m_grid[0] < 2 {
            return Err(Error::InvalidArgument("M grid must be increasing and start at 2 or later".into()));
        }
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(Error::InvalidArgument(format!("alpha must lie in (0,1), got {alpha}")));
        }
        if spec.declared_codim() < 2 {
            return Err(Error::InvalidArgument("sieve experiments need codimension at least 2".into()));
        }
        Ok(Self {
            spec,
            t_grid,
            m_grid,
            alpha,
            norm: Norm::Euclidean,
            factorizer: Factorizer::default(),
            table: OnceLock::new(),
        })
    }

    pub fn with_norm(mut self, norm: Norm) -> Self {
        self.norm = norm;
        self.table = OnceLock::new();
        self
    }

    pub fn with_factorizer(mut self, factorizer: Factorizer) -> Self {
        self.factorizer = factorizer;
        self
    }

    pub fn instance(&self) -> &AffineQuadricInstance {
        self.spec.ambient()
    }

    pub fn spec(&self) -> &ClosedSubsetSpec {
        &self.spec
    }

    pub fn t_grid(&self) -> &[u64] {
        &self.t_grid
    }

    pub fn m_grid(&self) -> &[u128] {
        &self.m_grid
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn norm(&self) -> Norm {
        self.norm
    }

    fn window(&self, t: u64) -> Result<HeightWindow> {
        HeightWindow::integer(t, self.norm)
    }

    /// The gcd table at the largest grid height, built once.
    fn table(&self) -> Result<&GcdTable> {
        if let Some(t) = self.table.get() {
            return Ok(t);
        }
        let top = self.window(*self.t_grid.last().expect("validated nonempty"))?;
        let built = GcdTable::build(&self.spec, &top)?;
        Ok(self.table.get_or_init(|| built))
    }

    /// Tables for heights above the grid are built on demand.
    fn histogram(&self, t: u64) -> Result<BTreeMap<u128, u64>> {
        let w = self.window(t)?;
        if t <= *self.t_grid.last().expect("validated nonempty") {
            self.table()?.histogram(&w)
        } else {
            GcdTable::build(&self.spec, &w)?.histogram(&w)
        }
    }

    pub fn total(&self, t: u64) -> Result<u64> {
        Ok(self.histogram(t)?.values().sum())
    }

    pub fn tail_count(&self, t: u64, m: u128) -> Result<TailCount> {
        if m < 2 {
            return Err(Error::InvalidArgument("M must be at least 2".into()));
        }
        let hist = self.histogram(t)?;
        let f = &self.factorizer;
        let count = |w: PrimeWindow| lattice::sieve_window_from_histogram(&hist, w, f);
        let t = t as u128;
        let cut = (t as f64).powf(self.alpha).floor() as u128;
        let whole = count(PrimeWindow::at_least(m)?)?;
        let low = if cut >= m { count(PrimeWindow::new(m, Some(cut))?)? } else { 0 };
        let mid_lo = (cut + 1).max(m).max(2);
        let mid = if t >= 1 && mid_lo <= t.saturating_sub(1) {
            count(PrimeWindow::new(mid_lo, Some(t - 1))?)?
        } else {
            0
        };
        let high = count(PrimeWindow::at_least(t.max(m).max(2))?)?;
        Ok(TailCount {
            t: t as u64,
            m,
            total: whole,
            split: [low, mid, high],
            cut,
        })
    }

    /// Points whose cutter values have gcd 1 (needs exactly two cutters).
    pub fn coprime_count(&self, t: u64) -> Result<u64> {
        if self.spec.cutters().len() != 2 {
            return Err(Error::InvalidArgument("coprime count needs exactly two cutters".into()));
        }
        Ok(self.histogram(t)?.get(&1).copied().unwrap_or(0))
    }

    pub fn purity_ratio_experiment(&self, p_star: u128, budget: u128) -> Result<PurityTable> {
        let product = localcount::purity_product(&self.spec, p_star, budget)?;
        let predicted = product.prediction();
        let rows = self
            .t_grid
            .iter()
            .map(|&t| {
                let hist = self.histogram(t)?;
                let total: u64 = hist.values().sum();
                let coprime = hist.get(&1).copied().unwrap_or(0);
                let ratio = if total == 0 { 1.0 } else { coprime as f64 / total as f64 };
                Ok(PurityRow {
                    t,
                    total,
                    coprime,
                    ratio,
                    product: predicted,
                    gap: (ratio - predicted).abs(),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(PurityTable { product, rows })
    }

    /// Fits `kappa` at the smallest `(T, M)` and tests
    /// `tail/N <= kappa (1/M^(c-1) + 1/sqrt(ln T))` on the whole grid.
    pub fn tail_shape_check(&self) -> Result<ShapeCheck> {
        let codim = self.spec.declared_codim() as i32;
        let shape = |t: u64, m: u128| 1.0 / (m as f64).powi(codim - 1) + 1.0 / (t as f64).ln().sqrt();
        let mut rows = Vec::new();
        for &t in &self.t_grid {
            let n = self.total(t)?;
            for &m in &self.m_grid {
                let tail = self.tail_count(t, m)?.total;
                let tau = if n == 0 { 0.0 } else { tail as f64 / n as f64 };
                rows.push(ShapeRow {
                    t,
                    m,
                    tail,
                    total: n,
                    tau,
                    shape: shape(t, m),
                    bound: 0.0,
                    pass: true,
                });
            }
        }
        let kappa = rows[0].tau / rows[0].shape;
        for r in &mut rows {
            r.bound = kappa * r.shape;
            r.pass = r.tau <= r.bound * (1.0 + 1e-12);
        }
        Ok(ShapeCheck { kappa, rows })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TailCount {
    pub t: u64,
    pub m: u128,
    /// `V(T; M, inf)`.
    pub total: u64,
    /// `[M, T^a]`, `(T^a, T)`, `[T, inf)`.
    pub split: [u64; 3],
    /// `floor(T^alpha)`.
    pub cut: u128,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PurityRow {
    pub t: u64,
    pub total: u64,
    pub coprime: u64,
    pub ratio: f64,
    pub product: f64,
    pub gap: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PurityTable {
    pub product: PurityProduct,
    pub rows: Vec<PurityRow>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ShapeRow {
    pub t: u64,
    pub m: u128,
    pub tail: u64,
    pub total: u64,
    pub tau: f64,
    pub shape: f64,
    pub bound: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ShapeCheck {
    pub kappa: f64,
    pub rows: Vec<ShapeRow>,
}

impl ShapeCheck {
    pub fn passed(&self) -> bool {
        self.rows.iter().all(|r| r.pass)
    }
}

/// `V_l(T; xi) #Q(Z/l) / N(T)` over every `xi` in `Q(Z/l)`.
#[derive(Debug, Clone, PartialEq)]
pub struct EquidistRow {
    pub t: u64,
    pub l: u64,
    pub total: u64,
    pub local_count: u128,
    /// `(xi, V_l(T; xi), normalized deviation)`.
    pub classes: Vec<(Vec<u64>, u64, f64)>,
    pub max_deviation: f64,
}

pub fn equidistribution(inst: &AffineQuadricInstance, window: &HeightWindow, l: u64) -> Result<EquidistRow> {
    let hist = lattice::residue_histogram(inst, window, l)?;
    let total: u64 = hist.values().sum();
    let poly = inst.defining_polynomial();
    let n = inst.dim();
    let mut classes = Vec::new();
    let mut xi = vec![0u64; n];
    loop {
        if poly.eval_mod(&xi, l) == 0 {
            let v = hist.get(&xi).copied().unwrap_or(0);
            classes.push((xi.clone(), v));
        }
        let mut i = n;
        let done = loop {
            if i == 0 {
                break true;
            }
            i -= 1;
            xi[i] += 1;
            if xi[i] < l {
                break false;
            }
            xi[i] = 0;
        };
        if done {
            break;
        }
    }
    let local_count = classes.len() as u128;
    let classes: Vec<(Vec<u64>, u64, f64)> = classes
        .into_iter()
        .map(|(xi, v)| {
            let dev = if total == 0 {
                f64::INFINITY
            } else {
                (v as f64 * local_count as f64 / total as f64 - 1.0).abs()
            };
            (xi, v, dev)
        })
        .collect();
    let max_deviation = classes.iter().map(|c| c.2).fold(0.0, f64::max);
    Ok(EquidistRow {
        t: window.radius(),
        l,
        total,
        local_count,
        classes,
        max_deviation,
    })
}

/// `#{X in [-T, T]^L : some prime p >= M divides every f_i(X)}`.
pub fn ekedahl_box_count(cutters: &[IntPolynomial], t: u64, m: u128, factorizer: &Factorizer) -> Result<u64> {
    let hist = box_gcd_histogram(cutters, t)?;
    lattice::sieve_window_from_histogram(&hist, PrimeWindow::at_least(m)?, factorizer)
}

/// Cutter gcd multiplicities over the sup box; all cutters share one `L`.
pub fn box_gcd_histogram(cutters: &[IntPolynomial], t: u64) -> Result<BTreeMap<u128, u64>> {
    let l = cutters.iter().map(|f| f.nvars()).max().unwrap_or(0).max(1);
    let cutters = cutters.iter().map(|f| f.widen(l)).collect::<Result<Vec<_>>>()?;
    let r = i64::try_from(t).map_err(|_| Error::HeightTooLarge)?;
    let side = 2 * t as u128 + 1;
    let needed = side.checked_pow(l as u32).unwrap_or(u128::MAX);
    if needed > lattice::DEFAULT_BUDGET {
        return Err(Error::EnumerationBudget {
            needed,
            budget: lattice::DEFAULT_BUDGET,
        });
    }
    let merge = |mut a: BTreeMap<u128, u64>, b: BTreeMap<u128, u64>| {
        for (k, v) in b {
            *a.entry(k).or_insert(0) += v;
        }
        a
    };
    Ok((-r..=r)
        .into_par_iter()
        .map(|first| {
            let mut acc = BTreeMap::new();
            let mut x = vec![-r; l];
            x[0] = first;
            loop {
                let d = cutters
                    .iter()
                    .fold(0u128, |g, f| num_integer::gcd(g, f.eval_i64(&x).unsigned_abs()));
                *acc.entry(d).or_insert(0u64) += 1;
                let mut i = l;
                loop {
                    if i == 1 {
                        return acc;
                    }
                    i -= 1;
                    x[i] += 1;
                    if x[i] <= r {
                        break;
                    }
                    x[i] = -r;
                }
            }
        })
        .reduce(BTreeMap::new, merge))
}

/// Box analogue of the tail check: `count/(2T+1)^L <= kappa (1/M + 1/T)`,
/// with `kappa` fitted over the smallest-`T` row of the grid.
pub fn ekedahl_shape_check(
    cutters: &[IntPolynomial],
    t_grid: &[u64],
    m_grid: &[u128],
    factorizer: &Factorizer,
) -> Result<ShapeCheck> {
    if !increasing(t_grid) || !increasing(m_grid) || t_grid[0] == 0 {
        return Err(Error::InvalidArgument("grids must be nonempty and increasing".into()));
    }
    let l = cutters.iter().map(|f| f.nvars()).max().unwrap_or(0).max(1) as i32;
    let mut rows = Vec::new();
    for &t in t_grid {
        let hist = box_gcd_histogram(cutters, t)?;
        let total = (2 * t + 1).pow(l as u32);
        for &m in m_grid {
            let tail = lattice::sieve_window_from_histogram(&hist, PrimeWindow::at_least(m)?, factorizer)?;
            rows.push(ShapeRow {
                t,
                m,
                tail,
                total,
                tau: tail as f64 / total as f64,
                shape: 1.0 / m as f64 + 1.0 / t as f64,
                bound: 0.0,
                pass: true,
            });
        }
    }
    let kappa = rows
        .iter()
        .take(m_grid.len())
        .map(|r| r.tau / r.shape)
        .fold(0.0, f64::max);
    for r in &mut rows {
        r.bound = kappa * r.shape;
        r.pass = r.tau <= r.bound * (1.0 + 1e-12);
    }
    Ok(ShapeCheck { kappa, rows })
}
