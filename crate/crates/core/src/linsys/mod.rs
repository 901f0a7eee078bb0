//! Homogeneous linear systems with mixed weak and strict rows.
//!
//! [`decide_feasible`] returns either a point satisfying every row or a
//! transposition certificate: nonnegative multipliers whose combination of
//! the rows is the zero vector while putting positive weight on some strict
//! row. [`optimize`] handles weak rows plus affine side constraints, and
//! [`project`] eliminates variables.

mod project;
pub(crate) mod simplex;

pub use project::{project, project_with, ProjectOptions};

use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::rational::{self, dot, Rational};
use simplex::{maximize, Constraint, Outcome, Sense};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum WeakRelation {
    /// `a·d ≤ 0`
    Le,
    /// `a·d ≥ 0`
    Ge,
    /// `a·d = 0`
    Eq,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum StrictRelation {
    /// `a·d < 0`
    Lt,
    /// `a·d > 0`
    Gt,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WeakRow {
    #[serde(with = "rational::serde_vec")]
    pub coeffs: Vec<Rational>,
    pub relation: WeakRelation,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StrictRow {
    #[serde(with = "rational::serde_vec")]
    pub coeffs: Vec<Rational>,
    pub relation: StrictRelation,
}

impl WeakRow {
    /// Sign that turns the row into `σ a·d ≤ 0` (or `= 0`).
    fn orientation(&self) -> i8 {
        match self.relation {
            WeakRelation::Le | WeakRelation::Eq => 1,
            WeakRelation::Ge => -1,
        }
    }

    pub fn oriented(&self) -> Vec<Rational> {
        orient(&self.coeffs, self.orientation())
    }

    pub fn holds_at(&self, point: &[Rational]) -> bool {
        let v = dot(&self.coeffs, point);
        match self.relation {
            WeakRelation::Le => !v.is_positive(),
            WeakRelation::Ge => !v.is_negative(),
            WeakRelation::Eq => v.is_zero(),
        }
    }
}

impl StrictRow {
    fn orientation(&self) -> i8 {
        match self.relation {
            StrictRelation::Lt => 1,
            StrictRelation::Gt => -1,
        }
    }

    pub fn oriented(&self) -> Vec<Rational> {
        orient(&self.coeffs, self.orientation())
    }

    pub fn holds_at(&self, point: &[Rational]) -> bool {
        let v = dot(&self.coeffs, point);
        match self.relation {
            StrictRelation::Lt => v.is_negative(),
            StrictRelation::Gt => v.is_positive(),
        }
    }
}

fn orient(coeffs: &[Rational], sign: i8) -> Vec<Rational> {
    if sign > 0 {
        coeffs.to_vec()
    } else {
        coeffs.iter().map(|c| -c).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LinearSystem {
    dim: usize,
    weak: Vec<WeakRow>,
    strict: Vec<StrictRow>,
}

impl LinearSystem {
    pub fn new(dim: usize) -> Self {
        LinearSystem {
            dim,
            weak: Vec::new(),
            strict: Vec::new(),
        }
    }

    /// The system `0 < 0`, used as the canonical empty set.
    pub fn empty_set(dim: usize) -> Self {
        let mut s = LinearSystem::new(dim);
        s.push_strict(vec![Rational::zero(); dim], StrictRelation::Lt);
        s
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn weak_rows(&self) -> &[WeakRow] {
        &self.weak
    }

    pub fn strict_rows(&self) -> &[StrictRow] {
        &self.strict
    }

    pub fn row_count(&self) -> usize {
        self.weak.len() + self.strict.len()
    }

    /// True when some strict row has an all-zero coefficient vector, which
    /// makes the system unsatisfiable on its face.
    pub fn is_trivially_empty(&self) -> bool {
        self.strict.iter().any(|r| rational::is_zero_vec(&r.coeffs))
    }

    pub fn push_weak(&mut self, coeffs: Vec<Rational>, relation: WeakRelation) {
        assert_eq!(coeffs.len(), self.dim, "row length must equal dimension");
        self.weak.push(WeakRow { coeffs, relation });
    }

    pub fn push_strict(&mut self, coeffs: Vec<Rational>, relation: StrictRelation) {
        assert_eq!(coeffs.len(), self.dim, "row length must equal dimension");
        self.strict.push(StrictRow { coeffs, relation });
    }

    pub fn le(mut self, coeffs: Vec<Rational>) -> Self {
        self.push_weak(coeffs, WeakRelation::Le);
        self
    }

    pub fn ge(mut self, coeffs: Vec<Rational>) -> Self {
        self.push_weak(coeffs, WeakRelation::Ge);
        self
    }

    pub fn eq(mut self, coeffs: Vec<Rational>) -> Self {
        self.push_weak(coeffs, WeakRelation::Eq);
        self
    }

    pub fn lt(mut self, coeffs: Vec<Rational>) -> Self {
        self.push_strict(coeffs, StrictRelation::Lt);
        self
    }

    pub fn gt(mut self, coeffs: Vec<Rational>) -> Self {
        self.push_strict(coeffs, StrictRelation::Gt);
        self
    }

    /// Rows of both systems over the same variables.
    pub fn and(&self, other: &LinearSystem) -> LinearSystem {
        assert_eq!(self.dim, other.dim, "dimension mismatch");
        let mut out = self.clone();
        out.weak.extend(other.weak.iter().cloned());
        out.strict.extend(other.strict.iter().cloned());
        out
    }

    /// Same rows, but with every strict row relaxed to its weak form.
    pub fn closure(&self) -> LinearSystem {
        let mut out = LinearSystem::new(self.dim);
        out.weak = self.weak.clone();
        for r in &self.strict {
            let rel = match r.relation {
                StrictRelation::Lt => WeakRelation::Le,
                StrictRelation::Gt => WeakRelation::Ge,
            };
            out.push_weak(r.coeffs.clone(), rel);
        }
        out
    }

    pub fn contains(&self, point: &[Rational]) -> bool {
        assert_eq!(point.len(), self.dim, "point length must equal dimension");
        self.weak.iter().all(|r| r.holds_at(point)) && self.strict.iter().all(|r| r.holds_at(point))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MotzkinCertificate {
    /// One per weak row, in row order. Multipliers on `=` rows may take any
    /// sign; all others are nonnegative.
    #[serde(with = "rational::serde_vec")]
    pub weak_multipliers: Vec<Rational>,
    /// One per strict row, nonnegative, summing to one.
    #[serde(with = "rational::serde_vec")]
    pub strict_multipliers: Vec<Rational>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum FeasibilityResult {
    Witness(Vec<Rational>),
    Certificate(MotzkinCertificate),
}

impl FeasibilityResult {
    pub fn witness(&self) -> Option<&[Rational]> {
        match self {
            FeasibilityResult::Witness(w) => Some(w),
            FeasibilityResult::Certificate(_) => None,
        }
    }

    pub fn is_feasible(&self) -> bool {
        matches!(self, FeasibilityResult::Witness(_))
    }
}

/// Decides whether the system has a solution.
pub fn decide_feasible(system: &LinearSystem) -> FeasibilityResult {
    let n = system.dim;
    if system.strict.is_empty() {
        return FeasibilityResult::Witness(vec![Rational::zero(); n]);
    }

    // max t  s.t.  weak rows, b·d + t ≤ 0 for strict rows, t ≤ 1.
    let nv = n + 1;
    let mut cons = Vec::with_capacity(system.row_count() + 1);
    for r in &system.weak {
        let mut row = r.oriented();
        row.push(Rational::zero());
        let sense = if r.relation == WeakRelation::Eq {
            Sense::Eq
        } else {
            Sense::Le
        };
        cons.push(Constraint::new(row, sense, Rational::zero()));
    }
    for r in &system.strict {
        let mut row = r.oriented();
        row.push(Rational::one());
        cons.push(Constraint::new(row, Sense::Le, Rational::zero()));
    }
    let mut cap = vec![Rational::zero(); nv];
    cap[n] = Rational::one();
    cons.push(Constraint::new(cap.clone(), Sense::Le, Rational::one()));

    match maximize(&cap, &cons, &vec![false; nv]) {
        Outcome::Optimal { point, value } if value.is_positive() => {
            let d = point[..n].to_vec();
            assert!(system.contains(&d), "witness failed verification");
            return FeasibilityResult::Witness(d);
        }
        Outcome::Optimal { .. } => {}
        other => unreachable!("slack program is feasible and bounded: {other:?}"),
    }

    let cert = transposition_certificate(system)
        .expect("zero optimal slack implies a transposition certificate");
    assert!(
        verify_certificate(system, &cert),
        "certificate failed verification"
    );
    FeasibilityResult::Certificate(cert)
}

fn transposition_certificate(system: &LinearSystem) -> Option<MotzkinCertificate> {
    let n = system.dim;
    let nw = system.weak.len();
    let ns = system.strict.len();
    let nv = nw + ns;

    let weak_oriented: Vec<Vec<Rational>> = system.weak.iter().map(WeakRow::oriented).collect();
    let strict_oriented: Vec<Vec<Rational>> =
        system.strict.iter().map(StrictRow::oriented).collect();

    let mut cons = Vec::with_capacity(n + 1);
    for j in 0..n {
        let mut row = Vec::with_capacity(nv);
        row.extend(weak_oriented.iter().map(|a| a[j].clone()));
        row.extend(strict_oriented.iter().map(|b| b[j].clone()));
        cons.push(Constraint::new(row, Sense::Eq, Rational::zero()));
    }
    let mut total = vec![Rational::zero(); nv];
    for t in total.iter_mut().skip(nw) {
        *t = Rational::one();
    }
    cons.push(Constraint::new(total, Sense::Eq, Rational::one()));

    let nonneg: Vec<bool> = system
        .weak
        .iter()
        .map(|r| r.relation != WeakRelation::Eq)
        .chain(std::iter::repeat_n(true, ns))
        .collect();

    match maximize(&vec![Rational::zero(); nv], &cons, &nonneg) {
        Outcome::Optimal { point, .. } => {
            let mut y = point;
            let z = y.split_off(nw);
            // Report multipliers against the rows as written.
            let weak_multipliers = y;
            Some(MotzkinCertificate {
                weak_multipliers,
                strict_multipliers: z,
            })
        }
        _ => None,
    }
}

/// Checks a transposition certificate against the system it claims to refute.
pub fn verify_certificate(system: &LinearSystem, cert: &MotzkinCertificate) -> bool {
    if cert.weak_multipliers.len() != system.weak.len()
        || cert.strict_multipliers.len() != system.strict.len()
    {
        return false;
    }
    for (r, y) in system.weak.iter().zip(&cert.weak_multipliers) {
        if r.relation != WeakRelation::Eq && y.is_negative() {
            return false;
        }
    }
    if cert.strict_multipliers.iter().any(Signed::is_negative) {
        return false;
    }
    if !cert.strict_multipliers.iter().any(Signed::is_positive) {
        return false;
    }
    let mut combo = vec![Rational::zero(); system.dim];
    for (r, y) in system.weak.iter().zip(&cert.weak_multipliers) {
        accumulate(&mut combo, &r.oriented(), y);
    }
    for (r, z) in system.strict.iter().zip(&cert.strict_multipliers) {
        accumulate(&mut combo, &r.oriented(), z);
    }
    rational::is_zero_vec(&combo)
}

fn accumulate(acc: &mut [Rational], row: &[Rational], k: &Rational) {
    if k.is_zero() {
        return;
    }
    for (a, r) in acc.iter_mut().zip(row) {
        *a += k * r;
    }
}

/// An affine side constraint `coeffs·d (relation) rhs`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AffineRow {
    pub coeffs: Vec<Rational>,
    pub relation: WeakRelation,
    pub rhs: Rational,
}

impl AffineRow {
    pub fn new(coeffs: Vec<Rational>, relation: WeakRelation, rhs: Rational) -> Self {
        AffineRow {
            coeffs,
            relation,
            rhs,
        }
    }

    fn holds_at(&self, point: &[Rational]) -> bool {
        let v = dot(&self.coeffs, point);
        match self.relation {
            WeakRelation::Le => v <= self.rhs,
            WeakRelation::Ge => v >= self.rhs,
            WeakRelation::Eq => v == self.rhs,
        }
    }
}

/// Farkas-type refutation of weak rows plus affine rows: with rows oriented
/// as `≤`, `Σ y a + Σ μ n = 0` while `Σ μ β < 0`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FarkasCertificate {
    pub weak_multipliers: Vec<Rational>,
    pub affine_multipliers: Vec<Rational>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum OptimizeResult {
    Optimum {
        value: Rational,
        point: Vec<Rational>,
    },
    Unbounded {
        point: Vec<Rational>,
        ray: Vec<Rational>,
    },
    Infeasible(FarkasCertificate),
}

/// Maximizes `objective·d` over the weak rows of `system` together with the
/// affine rows. Strict rows are not allowed.
pub fn optimize(
    objective: &[Rational],
    system: &LinearSystem,
    affine: &[AffineRow],
) -> OptimizeResult {
    assert!(
        system.strict.is_empty(),
        "optimize accepts weak rows only; strict rows must be normalized away"
    );
    let n = system.dim;
    assert_eq!(objective.len(), n, "objective length must equal dimension");
    let mut cons = Vec::with_capacity(system.weak.len() + affine.len());
    for r in &system.weak {
        let sense = match r.relation {
            WeakRelation::Le => Sense::Le,
            WeakRelation::Ge => Sense::Ge,
            WeakRelation::Eq => Sense::Eq,
        };
        cons.push(Constraint::new(r.coeffs.clone(), sense, Rational::zero()));
    }
    for a in affine {
        assert_eq!(a.coeffs.len(), n, "affine row length must equal dimension");
        let sense = match a.relation {
            WeakRelation::Le => Sense::Le,
            WeakRelation::Ge => Sense::Ge,
            WeakRelation::Eq => Sense::Eq,
        };
        cons.push(Constraint::new(a.coeffs.clone(), sense, a.rhs.clone()));
    }
    match maximize(objective, &cons, &vec![false; n]) {
        Outcome::Optimal { point, value } => OptimizeResult::Optimum { value, point },
        Outcome::Unbounded { point, ray } => OptimizeResult::Unbounded { point, ray },
        Outcome::Infeasible => {
            let cert = farkas_certificate(system, affine)
                .expect("infeasible program admits a Farkas certificate");
            debug_assert!(verify_farkas(system, affine, &cert));
            OptimizeResult::Infeasible(cert)
        }
    }
}

fn affine_orientation(a: &AffineRow) -> i8 {
    match a.relation {
        WeakRelation::Le | WeakRelation::Eq => 1,
        WeakRelation::Ge => -1,
    }
}

fn farkas_certificate(system: &LinearSystem, affine: &[AffineRow]) -> Option<FarkasCertificate> {
    let n = system.dim;
    let nw = system.weak.len();
    let na = affine.len();
    let nv = nw + na;
    let weak_oriented: Vec<Vec<Rational>> = system.weak.iter().map(WeakRow::oriented).collect();
    let affine_oriented: Vec<(Vec<Rational>, Rational)> = affine
        .iter()
        .map(|a| {
            let s = affine_orientation(a);
            let rhs = if s > 0 { a.rhs.clone() } else { -&a.rhs };
            (orient(&a.coeffs, s), rhs)
        })
        .collect();

    let mut cons = Vec::with_capacity(n + 1);
    for j in 0..n {
        let mut row = Vec::with_capacity(nv);
        row.extend(weak_oriented.iter().map(|a| a[j].clone()));
        row.extend(affine_oriented.iter().map(|(a, _)| a[j].clone()));
        cons.push(Constraint::new(row, Sense::Eq, Rational::zero()));
    }
    let mut rhs_row = vec![Rational::zero(); nv];
    for (k, (_, beta)) in affine_oriented.iter().enumerate() {
        rhs_row[nw + k] = beta.clone();
    }
    cons.push(Constraint::new(rhs_row, Sense::Eq, -Rational::one()));
    let nonneg: Vec<bool> = system
        .weak
        .iter()
        .map(|r| r.relation != WeakRelation::Eq)
        .chain(affine.iter().map(|a| a.relation != WeakRelation::Eq))
        .collect();
    match maximize(&vec![Rational::zero(); nv], &cons, &nonneg) {
        Outcome::Optimal { mut point, .. } => {
            let affine_multipliers = point.split_off(nw);
            Some(FarkasCertificate {
                weak_multipliers: point,
                affine_multipliers,
            })
        }
        _ => None,
    }
}

/// Checks a Farkas certificate produced by [`optimize`].
pub fn verify_farkas(system: &LinearSystem, affine: &[AffineRow], cert: &FarkasCertificate) -> bool {
    if cert.weak_multipliers.len() != system.weak.len()
        || cert.affine_multipliers.len() != affine.len()
    {
        return false;
    }
    let mut combo = vec![Rational::zero(); system.dim];
    let mut bound = Rational::zero();
    for (r, y) in system.weak.iter().zip(&cert.weak_multipliers) {
        if r.relation != WeakRelation::Eq && y.is_negative() {
            return false;
        }
        accumulate(&mut combo, &r.oriented(), y);
    }
    for (a, mu) in affine.iter().zip(&cert.affine_multipliers) {
        if a.relation != WeakRelation::Eq && mu.is_negative() {
            return false;
        }
        let s = affine_orientation(a);
        accumulate(&mut combo, &orient(&a.coeffs, s), mu);
        let beta = if s > 0 { a.rhs.clone() } else { -&a.rhs };
        bound += mu * beta;
    }
    rational::is_zero_vec(&combo) && bound.is_negative()
}

/// True when `point` satisfies the weak rows of `system` and every affine row.
pub fn satisfies_affine(system: &LinearSystem, affine: &[AffineRow], point: &[Rational]) -> bool {
    system.weak.iter().all(|r| r.holds_at(point)) && affine.iter().all(|a| a.holds_at(point))
}
