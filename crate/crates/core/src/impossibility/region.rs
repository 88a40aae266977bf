//! Regions of the simplex cut out by linear and distance constraints.
//!
//! Both metrics are maxima of finitely many affine pieces on the
//! nonnegative orthant, so `d(q) <= c` is a conjunction of half-spaces and
//! `d(q) >= c` a disjunction. A region is decided by expanding it into a
//! disjunction of polyhedra and running exact elimination on each.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use super::Metric;
use crate::error::{Error, Result};
use crate::numerics::{fm_feasible, Feasibility, LinearConstraint, Rational, Rel};

type Conj = Vec<LinearConstraint<Rational>>;

/// An affine piece `grad · q − offset` of a distance function.
#[derive(Clone, Debug, PartialEq)]
pub struct Piece {
    pub grad: Vec<Rational>,
    pub offset: Rational,
}

impl Piece {
    fn eval(&self, q: &[Rational]) -> Rational {
        let s: Rational = self.grad.iter().zip(q).map(|(g, x)| g * x).sum();
        s - &self.offset
    }
}

/// The pieces of `q ↦ d(peak, q)`. Coordinates where the peak is zero only
/// get the `+q_j` orientation, which is exact for `q >= 0`.
pub fn pieces(metric: Metric, peak: &[Rational]) -> Vec<Piece> {
    let m = peak.len();
    let make = |grad: Vec<Rational>| {
        let offset = grad.iter().zip(peak).map(|(g, p)| g * p).sum();
        Piece { grad, offset }
    };
    match metric {
        Metric::L1 => {
            let support: Vec<usize> = (0..m).filter(|&j| peak[j].is_positive()).collect();
            (0..1usize << support.len())
                .map(|mask| {
                    let mut grad = vec![Rational::one(); m];
                    for (bit, &j) in support.iter().enumerate() {
                        if mask >> bit & 1 == 1 {
                            grad[j] = -Rational::one();
                        }
                    }
                    make(grad)
                })
                .collect()
        }
        Metric::LInf => {
            let mut out = Vec::new();
            for j in 0..m {
                let mut g = vec![Rational::zero(); m];
                g[j] = Rational::one();
                out.push(make(g.clone()));
                if peak[j].is_positive() {
                    g[j] = -Rational::one();
                    out.push(make(g));
                }
            }
            out
        }
    }
}

/// Exact distance between two rational points.
pub fn exact_distance(metric: Metric, peak: &[Rational], q: &[Rational]) -> Rational {
    let diffs = peak.iter().zip(q).map(|(a, b)| (a - b).abs());
    match metric {
        Metric::L1 => diffs.sum(),
        Metric::LInf => diffs.fold(Rational::zero(), Rational::max_of),
    }
}

/// A constraint on an unknown distribution `q`.
#[derive(Clone, Debug, PartialEq)]
pub enum Atom {
    Linear(LinearConstraint<Rational>),
    /// `d(peak, q) rel bound`.
    Distance {
        metric: Metric,
        peak: Vec<Rational>,
        rel: Rel,
        bound: Rational,
    },
    /// The one-sided derivative of `d(peak, ·)` at `q` along `e_to − e_from`
    /// satisfies `rel 0` (`Gt` or `Ge`).
    Slope {
        metric: Metric,
        peak: Vec<Rational>,
        from: usize,
        to: usize,
        rel: Rel,
    },
}

impl Atom {
    /// `Σ_j coeff_j q_j rel rhs` over `m` coordinates.
    pub fn linear(m: usize, terms: &[(usize, Rational)], rel: Rel, rhs: Rational) -> Atom {
        let mut coeffs = vec![Rational::zero(); m];
        for (j, c) in terms {
            coeffs[*j] = &coeffs[*j] + c;
        }
        Atom::Linear(LinearConstraint::new(coeffs, rel, rhs))
    }

    /// `q_j rel rhs`.
    pub fn coordinate(m: usize, j: usize, rel: Rel, rhs: Rational) -> Atom {
        Atom::linear(m, &[(j, Rational::one())], rel, rhs)
    }

    pub fn distance(metric: Metric, peak: &[Rational], rel: Rel, bound: Rational) -> Atom {
        Atom::Distance {
            metric,
            peak: peak.to_vec(),
            rel,
            bound,
        }
    }

    /// The complement, as a disjunction of atoms.
    pub fn negation(&self) -> Result<Vec<Atom>> {
        let flip = |rel: Rel| -> Vec<Rel> {
            match rel.negated() {
                Some(r) => vec![r],
                None => vec![Rel::Lt, Rel::Gt],
            }
        };
        match self {
            Atom::Linear(c) => Ok(flip(c.rel)
                .into_iter()
                .map(|rel| {
                    Atom::Linear(LinearConstraint::new(c.coeffs.clone(), rel, c.rhs.clone()))
                })
                .collect()),
            Atom::Distance {
                metric,
                peak,
                rel,
                bound,
            } => Ok(flip(*rel)
                .into_iter()
                .map(|rel| Atom::distance(*metric, peak, rel, bound.clone()))
                .collect()),
            Atom::Slope { .. } => Err(Error::InvalidArgument(
                "slope atoms have no negation".into(),
            )),
        }
    }

    pub fn holds_at(&self, q: &[Rational]) -> bool {
        match self {
            Atom::Linear(c) => c.holds_at(q),
            Atom::Distance {
                metric,
                peak,
                rel,
                bound,
            } => compare(&exact_distance(*metric, peak, q), *rel, bound),
            Atom::Slope {
                metric,
                peak,
                from,
                to,
                rel,
            } => {
                let ps = pieces(*metric, peak);
                let top = ps
                    .iter()
                    .map(|p| p.eval(q))
                    .fold(None, |acc: Option<Rational>, v| match acc {
                        Some(a) if a >= v => Some(a),
                        _ => Some(v),
                    });
                let Some(top) = top else { return false };
                let slope = ps
                    .iter()
                    .filter(|p| p.eval(q) == top)
                    .map(|p| &p.grad[*to] - &p.grad[*from])
                    .fold(None, |acc: Option<Rational>, v| match acc {
                        Some(a) if a >= v => Some(a),
                        _ => Some(v),
                    });
                slope.is_some_and(|s| compare(&s, *rel, &Rational::zero()))
            }
        }
    }

    fn dnf(&self) -> Result<Vec<Conj>> {
        match self {
            Atom::Linear(c) => Ok(vec![vec![c.clone()]]),
            Atom::Distance {
                metric,
                peak,
                rel,
                bound,
            } => {
                let ps = pieces(*metric, peak);
                let piece_rel = |p: &Piece, rel: Rel| {
                    LinearConstraint::new(p.grad.clone(), rel, bound + &p.offset)
                };
                match rel {
                    Rel::Le | Rel::Lt => Ok(vec![ps.iter().map(|p| piece_rel(p, *rel)).collect()]),
                    Rel::Ge | Rel::Gt => Ok(ps.iter().map(|p| vec![piece_rel(p, *rel)]).collect()),
                    Rel::Eq => {
                        let upper: Conj = ps.iter().map(|p| piece_rel(p, Rel::Le)).collect();
                        Ok(ps
                            .iter()
                            .map(|p| {
                                let mut c = upper.clone();
                                c.push(piece_rel(p, Rel::Ge));
                                c
                            })
                            .collect())
                    }
                }
            }
            Atom::Slope {
                metric,
                peak,
                from,
                to,
                rel,
            } => {
                if !matches!(rel, Rel::Gt | Rel::Ge) {
                    return Err(Error::InvalidArgument("slope atoms take > or >=".into()));
                }
                let ps = pieces(*metric, peak);
                let mut out = Vec::new();
                for (i, p) in ps.iter().enumerate() {
                    let s = &p.grad[*to] - &p.grad[*from];
                    if !compare(&s, *rel, &Rational::zero()) {
                        continue;
                    }
                    // piece i attains the maximum
                    let active = ps
                        .iter()
                        .enumerate()
                        .filter(|&(k, _)| k != i)
                        .map(|(_, o)| {
                            let coeffs = p.grad.iter().zip(&o.grad).map(|(a, b)| a - b).collect();
                            LinearConstraint::new(coeffs, Rel::Ge, &p.offset - &o.offset)
                        })
                        .collect();
                    out.push(active);
                }
                Ok(out)
            }
        }
    }

    /// Renders the atom with variables named `{var}_a`, `{var}_b`, ….
    pub fn render(&self, var: &str) -> String {
        match self {
            Atom::Linear(c) => render_linear(c, var),
            Atom::Distance {
                metric,
                peak,
                rel,
                bound,
            } => {
                format!(
                    "{}({}, {var}) {} {bound}",
                    metric.tag(),
                    render_point(peak),
                    rel.symbol()
                )
            }
            Atom::Slope {
                metric,
                peak,
                from,
                to,
                rel,
            } => format!(
                "slope of {}({}, .) at {var} toward {}->{} {} 0",
                metric.tag(),
                render_point(peak),
                alt_name(*from),
                alt_name(*to),
                rel.symbol()
            ),
        }
    }
}

fn compare(a: &Rational, rel: Rel, b: &Rational) -> bool {
    match rel {
        Rel::Le => a <= b,
        Rel::Lt => a < b,
        Rel::Ge => a >= b,
        Rel::Gt => a > b,
        Rel::Eq => a == b,
    }
}

/// Alternatives are named `a`, `b`, `c`, … in rendered claims.
pub fn alt_name(j: usize) -> char {
    (b'a' + (j % 26) as u8) as char
}

pub fn render_point(p: &[Rational]) -> String {
    let parts: Vec<String> = p.iter().map(|x| format!("{x}")).collect();
    format!("({})", parts.join(","))
}

pub fn render_linear(c: &LinearConstraint<Rational>, var: &str) -> String {
    let mut s = String::new();
    for (j, a) in c.coeffs.iter().enumerate() {
        if a.is_zero() {
            continue;
        }
        let neg = a.is_negative();
        let mag = a.abs();
        if s.is_empty() {
            if neg {
                s.push('-');
            }
        } else {
            s.push_str(if neg { " - " } else { " + " });
        }
        if mag != Rational::one() {
            s.push_str(&format!("{mag}*"));
        }
        s.push_str(&format!("{var}_{}", alt_name(j)));
    }
    if s.is_empty() {
        s.push('0');
    }
    format!("{s} {} {}", c.rel.symbol(), c.rhs)
}

fn simplex(m: usize) -> Conj {
    let mut out: Conj = (0..m)
        .map(|j| {
            let mut e = vec![Rational::zero(); m];
            e[j] = Rational::one();
            LinearConstraint::new(e, Rel::Ge, Rational::zero())
        })
        .collect();
    out.push(LinearConstraint::new(
        vec![Rational::one(); m],
        Rel::Eq,
        Rational::one(),
    ));
    out
}

fn expand(m: usize, atoms: &[Atom]) -> Result<Vec<Conj>> {
    let mut acc = vec![simplex(m)];
    for atom in atoms {
        if let Atom::Linear(c) = atom {
            if c.coeffs.len() != m {
                return Err(Error::DimensionMismatch {
                    expected: m,
                    got: c.coeffs.len(),
                });
            }
        }
        let parts = atom.dnf()?;
        let mut next = Vec::with_capacity(acc.len() * parts.len());
        for base in &acc {
            for part in &parts {
                let mut c = base.clone();
                c.extend(part.iter().cloned());
                next.push(c);
            }
        }
        acc = next;
    }
    Ok(acc)
}

/// A point of the region `{q ∈ Δ^m : all atoms hold}`, or `None` when it is
/// empty.
pub fn region_point(m: usize, atoms: &[Atom]) -> Result<Option<Vec<Rational>>> {
    for conj in expand(m, atoms)? {
        if let Feasibility::Feasible(x) = fm_feasible(&conj, m)? {
            return Ok(Some(x));
        }
    }
    Ok(None)
}

/// Whether no distribution over `m` alternatives satisfies every atom.
/// Exact: strict and weak inequalities are kept apart.
pub fn region_infeasible(m: usize, atoms: &[Atom]) -> Result<bool> {
    Ok(region_point(m, atoms)?.is_none())
}

/// Whether `facts` imply `claim` on the simplex.
pub fn implies(m: usize, facts: &[Atom], claim: &Atom) -> Result<bool> {
    for alt in claim.negation()? {
        let mut all = facts.to_vec();
        all.push(alt);
        if !region_infeasible(m, &all)? {
            return Ok(false);
        }
    }
    Ok(true)
}

impl fmt::Display for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::rational::q;

    fn pt(v: &[(i64, i64)]) -> Vec<Rational> {
        v.iter().map(|&(a, b)| q(a, b)).collect()
    }

    #[test]
    fn simplex_alone_is_feasible() {
        assert!(!region_infeasible(3, &[]).unwrap());
    }

    #[test]
    fn contradictory_coordinate_bounds() {
        let atoms = [
            Atom::coordinate(3, 2, Rel::Le, q(1, 6)),
            Atom::coordinate(3, 2, Rel::Ge, q(1, 3)),
        ];
        assert!(region_infeasible(3, &atoms).unwrap());
    }

    #[test]
    fn strictness_is_exact() {
        let tight = [
            Atom::coordinate(3, 0, Rel::Le, q(1, 4)),
            Atom::coordinate(3, 0, Rel::Ge, q(1, 4)),
        ];
        assert!(!region_infeasible(3, &tight).unwrap());
        let open = [
            Atom::coordinate(3, 0, Rel::Lt, q(1, 4)),
            Atom::coordinate(3, 0, Rel::Ge, q(1, 4)),
        ];
        assert!(region_infeasible(3, &open).unwrap());
    }

    #[test]
    fn purple_region_contains_the_forced_point() {
        let atoms = [
            Atom::distance(Metric::L1, &pt(&[(1, 2), (1, 2), (0, 1)]), Rel::Le, q(2, 3)),
            Atom::distance(Metric::L1, &pt(&[(1, 1), (0, 1), (0, 1)]), Rel::Ge, q(4, 3)),
        ];
        assert!(!region_infeasible(3, &atoms).unwrap());
        let target = pt(&[(1, 6), (1, 2), (1, 3)]);
        assert!(atoms.iter().all(|a| a.holds_at(&target)));
        assert!(implies(3, &atoms, &Atom::coordinate(3, 0, Rel::Le, q(1, 3))).unwrap());
        assert!(implies(3, &atoms, &Atom::coordinate(3, 1, Rel::Ge, q(1, 3))).unwrap());
        assert!(!implies(3, &atoms, &Atom::coordinate(3, 1, Rel::Ge, q(1, 2))).unwrap());
    }

    #[test]
    fn pieces_reproduce_distances() {
        let peak = pt(&[(1, 2), (1, 4), (1, 4), (0, 1)]);
        let x = pt(&[(3, 8), (3, 8), (1, 8), (1, 8)]);
        for metric in [Metric::L1, Metric::LInf] {
            let top = pieces(metric, &peak)
                .iter()
                .map(|p| p.eval(&x))
                .fold(q(-9, 1), Rational::max_of);
            assert_eq!(top, exact_distance(metric, &peak, &x));
        }
        assert_eq!(exact_distance(Metric::LInf, &peak, &x), q(1, 8));
        assert_eq!(exact_distance(Metric::L1, &peak, &x), q(1, 2));
    }

    #[test]
    fn slope_atoms() {
        // ℓ1 agent at e_b gains when mass moves from a to b
        let eb = pt(&[(0, 1), (1, 1), (0, 1)]);
        let gain = Atom::Slope {
            metric: Metric::L1,
            peak: eb.clone(),
            from: 0,
            to: 1,
            rel: Rel::Ge,
        };
        let atoms = [Atom::coordinate(3, 0, Rel::Gt, q(0, 1)), gain.clone()];
        assert!(region_infeasible(3, &atoms).unwrap());
        // an agent at e_c is indifferent
        let ec = pt(&[(0, 1), (0, 1), (1, 1)]);
        let hurt = Atom::Slope {
            metric: Metric::L1,
            peak: ec,
            from: 0,
            to: 1,
            rel: Rel::Gt,
        };
        assert!(region_infeasible(3, &[hurt]).unwrap());
        let x = pt(&[(1, 2), (1, 4), (1, 4)]);
        assert!(!gain.holds_at(&x));
    }
}
