//! Lévy measures on finite index sets: cutoff functions, validation,
//! projection, consistency of families, minimal extension, the σ-finiteness
//! witness and the characteristic exponent of a generating triplet.

use std::collections::HashSet;
use std::fmt;
use std::sync::Arc;

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::quadrature::{integrate_complex, QuadratureOptions};
use crate::rng::SimRng;
use crate::scalar::Scalar;
use crate::stats::clopper_pearson;

/// Bounded function with `χ(0) = 1` used to centre small jumps.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CutoffFunction {
    /// `1{|v| ≤ 1}`
    #[default]
    IndicatorUnitBall,
    /// `1 / (1 ∨ |v|)`
    InverseMax,
    /// `1 / (1 + v²)`
    InverseQuadratic,
}

impl CutoffFunction {
    pub fn eval<T: Scalar>(self, v: T) -> T {
        let one = T::one();
        match self {
            Self::IndicatorUnitBall => {
                if v.abs() <= one {
                    one
                } else {
                    T::zero()
                }
            }
            Self::InverseMax => one / one.max(v.abs()),
            Self::InverseQuadratic => one / (one + v * v),
        }
    }

    /// `v·χ(|v|)`, the truncation `⟦v⟧` of a scalar.
    pub fn truncate_scalar<T: Scalar>(self, v: T) -> T {
        v * self.eval(v.abs())
    }
}

/// Componentwise truncation `⟦v⟧ = (v_k χ(|v_k|))_k`.
pub fn truncate<T: Scalar>(v: &[T], chi: CutoffFunction) -> Vec<T> {
    v.iter().map(|&x| chi.truncate_scalar(x)).collect()
}

/// Ordered list of distinct index labels.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<String>", into = "Vec<String>")]
pub struct FiniteIndexSet {
    labels: Vec<String>,
}

impl FiniteIndexSet {
    pub fn new<S: Into<String>>(labels: impl IntoIterator<Item = S>) -> Result<Self> {
        let labels: Vec<String> = labels.into_iter().map(Into::into).collect();
        let mut seen = HashSet::new();
        for l in &labels {
            if !seen.insert(l.as_str()) {
                return Err(Error::DuplicateLabel(l.clone()));
            }
        }
        Ok(Self { labels })
    }

    /// `{1, …, n}` labelled by decimal integers.
    pub fn range(n: usize) -> Self {
        Self {
            labels: (1..=n).map(|k| k.to_string()).collect(),
        }
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn dimension(&self) -> usize {
        self.labels.len()
    }

    pub fn position(&self, label: &str) -> Option<usize> {
        self.labels.iter().position(|l| l == label)
    }

    pub fn is_subset_of(&self, other: &Self) -> bool {
        self.labels.iter().all(|l| other.position(l).is_some())
    }
}

impl TryFrom<Vec<String>> for FiniteIndexSet {
    type Error = Error;
    fn try_from(v: Vec<String>) -> Result<Self> {
        Self::new(v)
    }
}

impl From<FiniteIndexSet> for Vec<String> {
    fn from(s: FiniteIndexSet) -> Self {
        s.labels
    }
}

impl fmt::Display for FiniteIndexSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{{}}}", self.labels.join(","))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct Atom<T> {
    pub point: Vec<T>,
    pub weight: T,
}

/// Finite sum of weighted point masses on `ℝ^I`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar", rename_all = "camelCase")]
pub struct AtomicMeasure<T> {
    pub index_set: FiniteIndexSet,
    pub atoms: Vec<Atom<T>>,
}

fn max_norm<T: Scalar>(p: &[T]) -> T {
    p.iter().fold(T::zero(), |m, &x| m.max(x.abs()))
}

/// Two points are the same atom when their max-norm distance is below
/// `1e-12·(1 + |p|)`.
pub fn same_point<T: Scalar>(p: &[T], q: &[T]) -> bool {
    let d = p.iter().zip(q).fold(T::zero(), |m, (&a, &b)| m.max((a - b).abs()));
    let tol = T::of(1e-12).max(T::epsilon() * T::of(4.0));
    d < tol * (T::one() + max_norm(p))
}

impl<T: Scalar> AtomicMeasure<T> {
    pub fn new(index_set: FiniteIndexSet, atoms: Vec<Atom<T>>) -> Result<Self> {
        let d = index_set.dimension();
        for a in &atoms {
            if a.point.len() != d {
                return Err(Error::DimensionMismatch {
                    expected: d,
                    got: a.point.len(),
                });
            }
            if !(a.weight >= T::zero()) || !a.weight.is_finite() {
                return Err(Error::InvalidParameter(format!(
                    "atom weight {} is not a finite nonnegative number",
                    a.weight
                )));
            }
        }
        Ok(Self { index_set, atoms })
    }

    pub fn empty(index_set: FiniteIndexSet) -> Self {
        Self {
            index_set,
            atoms: Vec::new(),
        }
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let m: Self = serde_json::from_str(s).map_err(|e| Error::InvalidParameter(e.to_string()))?;
        Self::new(m.index_set, m.atoms)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("measure serializes")
    }

    pub fn total_mass(&self) -> T {
        self.atoms.iter().map(|a| a.weight).sum()
    }

    pub fn origin_mass(&self) -> T {
        self.atoms
            .iter()
            .filter(|a| a.point.iter().all(|&x| x == T::zero()))
            .map(|a| a.weight)
            .sum()
    }

    /// `∫ |x(t)|² ∧ 1 ν(dx)` for coordinate `t`.
    pub fn coordinate_integral(&self, t: usize) -> T {
        self.atoms
            .iter()
            .map(|a| a.weight * (a.point[t] * a.point[t]).min(T::one()))
            .sum()
    }

    /// Merges atoms at equal points and drops zero weights. Atoms keep the
    /// order of their first occurrence.
    pub fn normalized(&self) -> Self {
        let mut out: Vec<Atom<T>> = Vec::new();
        for a in &self.atoms {
            match out.iter_mut().find(|b| same_point(&b.point, &a.point)) {
                Some(b) => b.weight = b.weight + a.weight,
                None => out.push(a.clone()),
            }
        }
        out.retain(|a| a.weight > T::zero());
        Self {
            index_set: self.index_set.clone(),
            atoms: out,
        }
    }

    /// Atom-set equality of the normalized measures, weights compared with
    /// absolute tolerance `tol`.
    pub fn approx_eq(&self, other: &Self, tol: T) -> bool {
        if self.index_set != other.index_set {
            return false;
        }
        let a = self.normalized();
        let b = other.normalized();
        let mut used = vec![false; b.atoms.len()];
        for x in &a.atoms {
            let hit = b
                .atoms
                .iter()
                .enumerate()
                .find(|(i, y)| !used[*i] && same_point(&x.point, &y.point));
            match hit {
                Some((i, y)) if (x.weight - y.weight).abs() <= tol => used[i] = true,
                Some(_) => return false,
                None if x.weight <= tol => {}
                None => return false,
            }
        }
        b.atoms.iter().zip(&used).all(|(y, &u)| u || y.weight <= tol)
    }
}

/// Outcome of [`validate_levy_measure`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub pass: bool,
    /// `∫ |x(t)|² ∧ 1 dν` per coordinate.
    pub coordinate_integrals: Vec<f64>,
    pub origin_mass: f64,
    pub failures: Vec<String>,
}

/// Overflow guard for the coordinate integrals.
const INTEGRAL_BOUND: f64 = 1e300;

/// Checks the two defining conditions of a Lévy measure on a finite index
/// set: finite `∫|x(t)|²∧1` for every coordinate and no mass at the origin.
pub fn validate_levy_measure<T: Scalar>(nu: &AtomicMeasure<T>) -> ValidationReport {
    let mut failures = Vec::new();
    let coordinate_integrals: Vec<f64> = (0..nu.index_set.dimension())
        .map(|t| nu.coordinate_integral(t).to_f64_lossy())
        .collect();
    for (t, v) in coordinate_integrals.iter().enumerate() {
        if !(v.is_finite() && *v < INTEGRAL_BOUND) {
            failures.push(format!("L1: coordinate {} has integral {v}", nu.index_set.labels()[t]));
        }
    }
    let origin_mass = nu.origin_mass().to_f64_lossy();
    if origin_mass != 0.0 {
        failures.push(format!("L2: mass {origin_mass} at the origin"));
    }
    ValidationReport {
        pass: failures.is_empty(),
        coordinate_integrals,
        origin_mass,
        failures,
    }
}

/// Pushforward of `nu_j` under the coordinate projection onto `i`, keeping
/// whatever mass lands on the origin.
pub fn project_measure_raw<T: Scalar>(nu_j: &AtomicMeasure<T>, i: &FiniteIndexSet) -> Result<AtomicMeasure<T>> {
    let pos: Vec<usize> = i
        .labels()
        .iter()
        .map(|l| nu_j.index_set.position(l))
        .collect::<Option<_>>()
        .ok_or_else(|| Error::IndexNotSubset {
            sub: i.labels().to_vec(),
            sup: nu_j.index_set.labels().to_vec(),
        })?;
    let atoms = nu_j
        .atoms
        .iter()
        .map(|a| Atom {
            point: pos.iter().map(|&k| a.point[k]).collect(),
            weight: a.weight,
        })
        .collect();
    Ok(AtomicMeasure {
        index_set: i.clone(),
        atoms,
    }
    .normalized())
}

/// Projection onto `i` restricted to `ℝ^I \ {0}`; equal points merged.
pub fn project_measure<T: Scalar>(nu_j: &AtomicMeasure<T>, i: &FiniteIndexSet) -> Result<AtomicMeasure<T>> {
    Ok(minimal_extension(&project_measure_raw(nu_j, i)?))
}

/// Removes the atom at the origin.
pub fn minimal_extension<T: Scalar>(nu: &AtomicMeasure<T>) -> AtomicMeasure<T> {
    let mut out = nu.normalized();
    out.atoms.retain(|a| a.point.iter().any(|&x| x != T::zero()));
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConsistencyReport {
    pub consistent: bool,
    /// First pair `(I, J)` with `I ⊂ J` whose projection disagrees.
    pub violation: Option<(FiniteIndexSet, FiniteIndexSet)>,
    pub pairs_checked: usize,
}

/// Checks that every stored `ν_J` projects onto every stored `ν_I` with
/// `I ⊂ J` (off the origin, weights to `1e-12·total mass`).
pub fn check_consistency<T: Scalar>(family: &[AtomicMeasure<T>]) -> ConsistencyReport {
    let mut pairs_checked = 0;
    for nu_j in family {
        for nu_i in family {
            let (i, j) = (&nu_i.index_set, &nu_j.index_set);
            if i.dimension() >= j.dimension() || !i.is_subset_of(j) {
                continue;
            }
            pairs_checked += 1;
            let projected = project_measure(nu_j, i).expect("subset checked above");
            let scale = nu_j.total_mass().max(nu_i.total_mass()).max(T::one());
            let tol = T::of(1e-12).max(T::epsilon() * T::of(8.0)) * scale;
            if !projected.approx_eq(&minimal_extension(nu_i), tol) {
                return ConsistencyReport {
                    consistent: false,
                    violation: Some((i.clone(), j.clone())),
                    pairs_checked,
                };
            }
        }
    }
    ConsistencyReport {
        consistent: true,
        violation: None,
        pairs_checked,
    }
}

/// Lévy measure of `n` i.i.d. Poisson(1) coordinates: unit atoms at the
/// standard basis vectors of `ℝ^n`.
pub fn iid_poisson_measure<T: Scalar>(n: usize) -> AtomicMeasure<T> {
    let atoms = (0..n)
        .map(|k| Atom {
            point: (0..n).map(|j| if j == k { T::one() } else { T::zero() }).collect(),
            weight: T::one(),
        })
        .collect();
    AtomicMeasure {
        index_set: FiniteIndexSet::range(n),
        atoms,
    }
}

type LineDensity<T> = Arc<dyn Fn(T) -> T + Send + Sync>;

/// Lévy measure concentrated on the ray `{x·d}` with density `p(x)` in the
/// scalar coordinate `x ∈ (lower, upper)`.
#[derive(Clone)]
pub struct DensityMeasure<T> {
    pub index_set: FiniteIndexSet,
    pub direction: Vec<T>,
    pub density: LineDensity<T>,
    pub lower: T,
    pub upper: T,
}

impl<T: fmt::Debug> fmt::Debug for DensityMeasure<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("DensityMeasure")
            .field("index_set", &self.index_set)
            .field("direction", &self.direction)
            .field("lower", &self.lower)
            .field("upper", &self.upper)
            .finish_non_exhaustive()
    }
}

#[derive(Debug, Clone)]
pub enum LevyMeasure<T> {
    Atomic(AtomicMeasure<T>),
    Density(DensityMeasure<T>),
}

impl<T: Scalar> LevyMeasure<T> {
    pub fn index_set(&self) -> &FiniteIndexSet {
        match self {
            Self::Atomic(m) => &m.index_set,
            Self::Density(d) => &d.index_set,
        }
    }
}

/// Generating triplet `(Σ, ν, b)` on a finite index set.
#[derive(Debug, Clone)]
pub struct FiniteLevyStructure<T> {
    sigma: Matrix<T>,
    levy: LevyMeasure<T>,
    shift: Vec<T>,
}

impl<T: Scalar> FiniteLevyStructure<T> {
    pub fn new(sigma: Matrix<T>, levy: LevyMeasure<T>, shift: Vec<T>) -> Result<Self> {
        let d = levy.index_set().dimension();
        if sigma.rows() != d || sigma.cols() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                got: sigma.rows(),
            });
        }
        if shift.len() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                got: shift.len(),
            });
        }
        let scale = sigma.max_abs().max(T::one());
        let asym = sigma.asymmetry();
        if asym > T::of(1e-12).max(T::epsilon() * T::of(8.0)) * scale {
            return Err(Error::NotSymmetric(asym.to_f64_lossy()));
        }
        let trace_scale = sigma.trace().abs().max(T::one());
        if let Some(&min) = sigma.symmetric_eigenvalues().first() {
            if min < -T::of(1e-10).max(T::epsilon() * T::of(64.0)) * trace_scale {
                return Err(Error::NotPositiveDefinite);
            }
        }
        match &levy {
            LevyMeasure::Atomic(m) => {
                let r = validate_levy_measure(m);
                if !r.pass {
                    return Err(Error::InvalidParameter(r.failures.join("; ")));
                }
            }
            LevyMeasure::Density(dm) => {
                if dm.direction.len() != d {
                    return Err(Error::DimensionMismatch {
                        expected: d,
                        got: dm.direction.len(),
                    });
                }
            }
        }
        Ok(Self { sigma, levy, shift })
    }

    pub fn sigma(&self) -> &Matrix<T> {
        &self.sigma
    }

    pub fn levy(&self) -> &LevyMeasure<T> {
        &self.levy
    }

    pub fn shift(&self) -> &[T] {
        &self.shift
    }
}

fn dot<T: Scalar>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).fold(T::zero(), |s, (&x, &y)| s + x * y)
}

/// `log E e^{i⟨a, Y_I⟩} = −½⟨a, Σa⟩ + ∫(e^{i⟨a,x⟩} − 1 − i⟨a, ⟦x⟧⟩) ν(dx) + i⟨a, b⟩`.
pub fn characteristic_exponent<T: Scalar>(
    triplet: &FiniteLevyStructure<T>,
    a: &[T],
    chi: CutoffFunction,
) -> Result<Complex<T>> {
    let d = triplet.shift.len();
    if a.len() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            got: a.len(),
        });
    }
    let half = T::of(0.5);
    let gauss = -half * dot(a, &triplet.sigma.matvec(a));
    let integrand = |x: &[T]| {
        let phase = dot(a, x);
        let (s, c) = phase.sin_cos();
        let trunc = dot(a, &truncate(x, chi));
        Complex::new(c - T::one(), s - trunc)
    };
    let jumps = match &triplet.levy {
        LevyMeasure::Atomic(m) => m.atoms.iter().fold(Complex::new(T::zero(), T::zero()), |acc, at| {
            acc + integrand(&at.point) * at.weight
        }),
        LevyMeasure::Density(dm) => {
            let ad = dot(a, &dm.direction);
            let f = |x: T| {
                let (s, c) = (ad * x).sin_cos();
                let trunc = a
                    .iter()
                    .zip(&dm.direction)
                    .fold(T::zero(), |acc, (&ak, &dk)| acc + ak * chi.truncate_scalar(dk * x));
                Complex::new(c - T::one(), s - trunc) * (dm.density)(x)
            };
            integrate_complex(f, dm.lower, dm.upper, &QuadratureOptions::default())?
        }
    };
    Ok(Complex::new(gauss, dot(a, &triplet.shift)) + jumps)
}

/// Outcome of [`sigma_finiteness_witness`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WitnessReport {
    pub probes: u64,
    pub vanishing: u64,
    pub estimate: f64,
    pub upper_ci: f64,
    pub threshold: f64,
    pub witnessed: bool,
}

pub const DEFAULT_WITNESS_THRESHOLD: f64 = 1e-3;

/// Estimates `n⁽¹⁾{s : V_t(s) = 0 for all t ∈ T₀}` by sampling from the
/// representation's probability measure. A 95% Clopper-Pearson upper bound
/// below `threshold` witnesses (but never proves) that the Lévy measure puts
/// no mass on `{x_{T₀} = 0}`.
pub fn sigma_finiteness_witness<R: crate::prm::LevyRepresentation>(
    rep: &R,
    candidate_t0: &[f64],
    probes: u64,
    threshold: f64,
    rng: &mut SimRng,
) -> Result<WitnessReport> {
    if candidate_t0.is_empty() {
        return Err(Error::EmptyCandidateSet);
    }
    let vanishing = (0..probes)
        .filter(|_| {
            let s = rep.sample_point(rng);
            candidate_t0.iter().all(|&t| rep.kernel(t, &s) == 0.0)
        })
        .count() as u64;
    let (_, upper_ci) = clopper_pearson(vanishing, probes, 0.05);
    Ok(WitnessReport {
        probes,
        vanishing,
        estimate: vanishing as f64 / probes.max(1) as f64,
        upper_ci,
        threshold,
        witnessed: upper_ci < threshold,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn atom(point: &[f64], weight: f64) -> Atom<f64> {
        Atom {
            point: point.to_vec(),
            weight,
        }
    }

    #[test]
    fn cutoff_kinds() {
        for chi in [
            CutoffFunction::IndicatorUnitBall,
            CutoffFunction::InverseMax,
            CutoffFunction::InverseQuadratic,
        ] {
            assert_eq!(chi.eval(0.0f64), 1.0);
            assert_eq!(truncate(&[0.0f64, 0.0], chi), vec![0.0, 0.0]);
        }
        assert_eq!(truncate(&[0.5, 2.0], CutoffFunction::IndicatorUnitBall), vec![0.5, 0.0]);
        assert_eq!(truncate(&[2.0], CutoffFunction::InverseMax), vec![1.0]);
        assert_eq!(CutoffFunction::InverseQuadratic.eval(2.0f32), 0.2);
    }

    #[test]
    fn validation_examples() {
        let set = FiniteIndexSet::range(2);
        let ok = AtomicMeasure::new(set.clone(), vec![atom(&[1.0, 1.0], 1.0)]).unwrap();
        assert!(validate_levy_measure(&ok).pass);
        let bad = AtomicMeasure::new(set, vec![atom(&[0.0, 0.0], 0.3)]).unwrap();
        let r = validate_levy_measure(&bad);
        assert!(!r.pass);
        assert!(r.failures[0].starts_with("L2"));
        let counting = iid_poisson_measure::<f64>(3);
        let r = validate_levy_measure(&counting);
        assert!(r.pass);
        assert_eq!(r.coordinate_integrals, vec![1.0, 1.0, 1.0]);
    }

    #[test]
    fn projection_examples() {
        let nu3 = iid_poisson_measure::<f64>(3);
        let i = FiniteIndexSet::range(2);
        let p = project_measure(&nu3, &i).unwrap();
        assert!(p.approx_eq(&iid_poisson_measure(2), 1e-15));
        let set = FiniteIndexSet::range(2);
        let off_axis = AtomicMeasure::new(set.clone(), vec![atom(&[0.5, 3.0], 0.7)]).unwrap();
        let one = FiniteIndexSet::new(["1"]).unwrap();
        let p = project_measure(&off_axis, &one).unwrap();
        assert_eq!(p.atoms, vec![atom(&[0.5], 0.7)]);
        let on_axis = AtomicMeasure::new(set, vec![atom(&[0.0, 3.0], 0.7)]).unwrap();
        assert!(project_measure(&on_axis, &one).unwrap().atoms.is_empty());
        let bad = FiniteIndexSet::new(["9"]).unwrap();
        assert!(matches!(
            project_measure(&on_axis, &bad),
            Err(Error::IndexNotSubset { .. })
        ));
    }

    #[test]
    fn iid_poisson_family_is_consistent_but_not_projective() {
        let family: Vec<AtomicMeasure<f64>> = (1..=3).map(iid_poisson_measure).collect();
        let r = check_consistency(&family);
        assert!(r.consistent);
        assert_eq!(r.pairs_checked, 3);
        for (n, r) in [(1usize, 2usize), (1, 3), (2, 3)] {
            let raw = project_measure_raw(&family[r - 1], &FiniteIndexSet::range(n)).unwrap();
            assert_eq!(raw.origin_mass(), (r - n) as f64);
            assert_eq!(raw.total_mass() - raw.origin_mass(), family[n - 1].total_mass());
        }
    }

    #[test]
    fn perturbed_family_is_flagged() {
        let mut family: Vec<AtomicMeasure<f64>> = (1..=3).map(iid_poisson_measure).collect();
        family[2].atoms[0].weight += 1e-3;
        let r = check_consistency(&family);
        assert!(!r.consistent);
        let (i, j) = r.violation.unwrap();
        assert_eq!(j, FiniteIndexSet::range(3));
        assert!(i.is_subset_of(&j));
        assert!(check_consistency(&family[..1]).consistent);
    }

    #[test]
    fn minimal_extension_examples() {
        let set = FiniteIndexSet::range(2);
        let m = AtomicMeasure::new(
            set.clone(),
            vec![atom(&[0.0, 0.0], 2.0), atom(&[1.0, 0.0], 0.5), atom(&[0.0, -1.0], 1.5)],
        )
        .unwrap();
        let e = minimal_extension(&m);
        assert_eq!(e.atoms, vec![atom(&[1.0, 0.0], 0.5), atom(&[0.0, -1.0], 1.5)]);
        assert!(validate_levy_measure(&e).pass);
        assert_eq!(minimal_extension(&e), e);
        let origin = AtomicMeasure::new(set, vec![atom(&[0.0, 0.0], 1.0)]).unwrap();
        assert!(minimal_extension(&origin).atoms.is_empty());
    }

    #[test]
    fn duplicate_atoms_merge() {
        let set = FiniteIndexSet::range(1);
        let m = AtomicMeasure::new(set, vec![atom(&[1.0], 0.25), atom(&[1.0 + 1e-15], 0.5)]).unwrap();
        assert_eq!(m.normalized().atoms.len(), 1);
        assert_eq!(m.normalized().total_mass(), 0.75);
    }

    #[test]
    fn json_round_trip() {
        let m = iid_poisson_measure::<f64>(2);
        let s = m.to_json();
        assert!(s.contains("indexSet"));
        assert_eq!(AtomicMeasure::<f64>::from_json(&s).unwrap(), m);
        assert!(AtomicMeasure::<f64>::from_json(r#"{"indexSet":["a","a"],"atoms":[]}"#).is_err());
        assert!(AtomicMeasure::<f64>::from_json(r#"{"indexSet":["a"],"atoms":[{"point":[1,2],"weight":1}]}"#).is_err());
    }

    #[test]
    fn exponent_examples() {
        let one = FiniteIndexSet::range(1);
        let gauss = FiniteLevyStructure::new(
            Matrix::identity(1),
            LevyMeasure::Atomic(AtomicMeasure::empty(one.clone())),
            vec![0.0],
        )
        .unwrap();
        let chi = CutoffFunction::IndicatorUnitBall;
        assert_eq!(
            characteristic_exponent(&gauss, &[0.0], chi).unwrap(),
            Complex::new(0.0, 0.0)
        );
        assert_eq!(
            characteristic_exponent(&gauss, &[1.0], chi).unwrap(),
            Complex::new(-0.5, 0.0)
        );

        let poisson = FiniteLevyStructure::new(
            Matrix::zeros(1, 1),
            LevyMeasure::Atomic(AtomicMeasure::new(one, vec![atom(&[1.0], 1.0)]).unwrap()),
            vec![1.0],
        )
        .unwrap();
        let psi = characteristic_exponent(&poisson, &[PI], chi).unwrap();
        assert!((psi - Complex::new(-2.0, 0.0)).norm() < 1e-12);
        // brute-force Poisson(1) characteristic function at a = 0.7
        let a = 0.7;
        let cf: Complex<f64> = (0..60)
            .map(|k| Complex::from_polar(crate::stats::poisson_pmf(k, 1.0), a * k as f64))
            .sum();
        let psi = characteristic_exponent(&poisson, &[a], chi).unwrap();
        assert!((psi.exp() - cf).norm() < 1e-13);
    }

    #[test]
    fn gamma_density_exponent() {
        // Gamma(alpha, 1): ν(dx) = α e^{-x} x^{-1} dx, b = ∫_0^1 x ν(dx)
        let alpha = 1.5;
        let one = FiniteIndexSet::range(1);
        let triplet = FiniteLevyStructure::new(
            Matrix::zeros(1, 1),
            LevyMeasure::Density(DensityMeasure {
                index_set: one,
                direction: vec![1.0],
                density: Arc::new(move |x: f64| alpha * (-x).exp() / x),
                lower: 0.0,
                upper: f64::INFINITY,
            }),
            vec![alpha * (1.0 - (-1.0f64).exp())],
        )
        .unwrap();
        for a in [0.3, -1.2, 4.0] {
            let psi = characteristic_exponent(&triplet, &[a], CutoffFunction::IndicatorUnitBall).unwrap();
            let exact = -Complex::new(1.0, -a).ln() * alpha;
            assert!((psi - exact).norm() < 1e-7, "a={a}: {psi} vs {exact}");
        }
    }

    #[test]
    fn triplet_validation() {
        let two = FiniteIndexSet::range(2);
        let empty = || LevyMeasure::Atomic(AtomicMeasure::<f64>::empty(two.clone()));
        let asym = Matrix::from_rows(&[vec![1.0, 0.5], vec![0.0, 1.0]]).unwrap();
        assert!(matches!(
            FiniteLevyStructure::new(asym, empty(), vec![0.0; 2]),
            Err(Error::NotSymmetric(_))
        ));
        let indefinite = Matrix::from_rows(&[vec![1.0, 2.0], vec![2.0, 1.0]]).unwrap();
        assert!(FiniteLevyStructure::new(indefinite, empty(), vec![0.0; 2]).is_err());
        assert!(FiniteLevyStructure::new(Matrix::identity(2), empty(), vec![0.0]).is_err());
    }

    #[test]
    fn single_precision_algebra() {
        let nu = iid_poisson_measure::<f32>(3);
        let p = project_measure(&nu, &FiniteIndexSet::range(2)).unwrap();
        assert!(p.approx_eq(&iid_poisson_measure(2), 1e-6));
        let t = FiniteLevyStructure::new(Matrix::<f32>::zeros(3, 3), LevyMeasure::Atomic(nu), vec![0.0; 3]).unwrap();
        let psi = characteristic_exponent(&t, &[0.1, 0.2, 0.3], CutoffFunction::InverseMax).unwrap();
        assert!(psi.re < 0.0);
    }
}
