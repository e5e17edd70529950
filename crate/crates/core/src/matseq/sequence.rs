use std::sync::{Arc, Mutex, RwLock};

use rug::{Integer, Rational};
use serde::Serialize;

use super::matrix::{CompanionMatrix, Mat2, SymMat2};
use crate::error::{Error, Result};
use crate::GOLDEN_RATIO;

/// Terms beyond this index are refused unless the cap is raised explicitly.
pub const DEFAULT_CAP: usize = 40;

/// Number of terms generated when judging whether a seed is admissible.
const ADMISSIBILITY_TERMS: usize = 12;

/// `log2 |n|`, finite for nonzero `n`.
pub fn log2_abs(n: &Integer) -> f64 {
    if *n == 0 {
        return f64::NEG_INFINITY;
    }
    let (mant, exp) = n.to_f64_exp();
    mant.abs().log2() + exp as f64
}

/// The first two matrices of a sequence.
#[derive(Clone, Debug, Serialize)]
pub struct SeedPair {
    pub x1: SymMat2,
    pub x2: SymMat2,
    /// Finite-index heuristic: growth and approximation checks on twelve terms.
    pub admissible: bool,
    /// First index from which `X_k < X_{k+1}` and `X_k < (1 + xi^2)|x_{k,0}|`
    /// hold on the generated terms (`ADMISSIBILITY_TERMS + 1` when never).
    pub first_valid_index: usize,
}

impl SeedPair {
    /// Checks the commutation condition `x1 M1 x2 = x2 M2 x1` and assesses
    /// admissibility.
    pub fn new(x1: SymMat2, x2: SymMat2) -> Result<Self> {
        let left = CompanionMatrix::for_index(1).right_mul(&x1).mul(&Mat2::from(&x2));
        let right = CompanionMatrix::for_index(2).right_mul(&x2).mul(&Mat2::from(&x1));
        if left != right {
            return Err(Error::InvariantViolation(format!(
                "seed ({x1}, {x2}) violates the commutation condition x1 M1 x2 = x2 M2 x1"
            )));
        }
        let (admissible, first_valid_index) = assess(&x1, &x2);
        Ok(SeedPair {
            x1,
            x2,
            admissible,
            first_valid_index,
        })
    }

    /// A seed that skips every check. Generation from it may fail later.
    pub fn unchecked(x1: SymMat2, x2: SymMat2) -> Self {
        SeedPair {
            x1,
            x2,
            admissible: false,
            first_valid_index: 1,
        }
    }

    /// `(identity, [[1, 1], [1, 2]])`
    pub fn canonical() -> Self {
        Self::new(SymMat2::identity(), SymMat2::from_i64(1, 1, 2).expect("det 1"))
            .expect("canonical seed commutes")
    }
}

/// Generates terms with the plain matrix product, no cross-checks.
fn raw_terms(x1: &SymMat2, x2: &SymMat2, n: usize) -> Option<Vec<SymMat2>> {
    let mut terms = vec![x1.clone(), x2.clone()];
    while terms.len() < n {
        let k = terms.len() - 1;
        let next = CompanionMatrix::for_index(k)
            .right_mul(&terms[k - 1])
            .mul(&Mat2::from(&terms[k]));
        terms.push(SymMat2::try_from_mat(next).ok()?);
    }
    Some(terms)
}

fn assess(x1: &SymMat2, x2: &SymMat2) -> (bool, usize) {
    let never = ADMISSIBILITY_TERMS + 1;
    let Some(terms) = raw_terms(x1, x2, ADMISSIBILITY_TERMS) else {
        return (false, never);
    };
    let last = &terms[ADMISSIBILITY_TERMS - 1];
    if last.x0 == 0 {
        return (false, never);
    }
    let xi_hat = Rational::from((last.x1.clone(), last.x0.clone()));
    let xi_f = xi_hat.to_f64();
    let scale = 1.0 + xi_f * xi_f;
    // index k is 1-based; terms[k - 1] is x_k
    let holds = |k: usize| {
        let (a, b) = (&terms[k - 1], &terms[k]);
        a.norm() < b.norm() && log2_abs(a.norm()) < scale.log2() + log2_abs(&a.x0)
    };
    let mut first_valid = never;
    for i in (1..ADMISSIBILITY_TERMS).rev() {
        if holds(i) {
            first_valid = i;
        } else {
            break;
        }
    }
    let increasing_from =
        (1..ADMISSIBILITY_TERMS).find(|&i| (i..ADMISSIBILITY_TERMS).all(|k| terms[k - 1].norm() < terms[k].norm()));
    let growth_ok = increasing_from.is_some_and(|i| i <= 4) && {
        let (l10, l11) = (log2_abs(terms[9].norm()), log2_abs(terms[10].norm()));
        l10 > 0.0 && ((l11 / l10) / GOLDEN_RATIO - 1.0).abs() <= 0.10
    };
    let approx_ok = first_valid < ADMISSIBILITY_TERMS
        && (first_valid..ADMISSIBILITY_TERMS).all(|k| {
            let x = &terms[k - 1];
            let err = Rational::from(&xi_hat * &x.x0) - &x.x1;
            let scaled = err.abs() * x.norm();
            scaled <= 10
        });
    let admissible = growth_ok && approx_ok && first_valid <= 4;
    (admissible, first_valid)
}

/// Every symmetric determinant-one matrix with entries bounded by `bound`.
pub fn symmetric_unimodular(bound: i64) -> Vec<SymMat2> {
    let mut out = Vec::new();
    for x0 in -bound..=bound {
        for x1 in -bound..=bound {
            for x2 in -bound..=bound {
                if x0 * x2 - x1 * x1 == 1 {
                    out.push(SymMat2::from_i64(x0, x1, x2).expect("det checked"));
                }
            }
        }
    }
    out
}

/// All commuting seed pairs with entries bounded by `entry_bound`, each
/// flagged admissible or not.
pub fn seed_search(entry_bound: i64) -> Vec<SeedPair> {
    if entry_bound < 1 {
        return Vec::new();
    }
    let mats = symmetric_unimodular(entry_bound);
    let mut out = Vec::new();
    for a in &mats {
        for b in &mats {
            if let Ok(seed) = SeedPair::new(a.clone(), b.clone()) {
                out.push(seed);
            }
        }
    }
    out
}

/// Immutable snapshot of the materialized terms `x_1..x_len`.
#[derive(Clone)]
pub struct TermsView {
    terms: Arc<Vec<Arc<SymMat2>>>,
}

impl std::fmt::Debug for TermsView {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "TermsView(1..={})", self.len())
    }
}

impl TermsView {
    /// Largest materialized index.
    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn get(&self, k: usize) -> Option<&SymMat2> {
        if k == 0 {
            return None;
        }
        self.terms.get(k - 1).map(|t| t.as_ref())
    }

    /// Term `x_k`; panics when `k` is not materialized, so callers check
    /// [`TermsView::require`] first.
    pub fn mat(&self, k: usize) -> &SymMat2 {
        self.get(k)
            .unwrap_or_else(|| panic!("term {k} not materialized (have {})", self.len()))
    }

    /// Entry `x_{k,j}`.
    pub fn x(&self, k: usize, j: usize) -> &Integer {
        self.mat(k).entry(j)
    }

    /// `X_k`
    pub fn norm(&self, k: usize) -> &Integer {
        self.mat(k).norm()
    }

    pub fn require(&self, lo: usize, hi: usize) -> Result<()> {
        if lo == 0 || hi > self.len() {
            return Err(Error::IndexOutOfRange(format!(
                "indices {lo}..={hi} requested, terms 1..={} materialized",
                self.len()
            )));
        }
        Ok(())
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, &SymMat2)> {
        self.terms.iter().enumerate().map(|(i, t)| (i + 1, t.as_ref()))
    }
}

/// Seed plus an append-only cache of terms.
///
/// Readers take cheap snapshots ([`TermsView`]); extension is serialized
/// through a single writer lock, and every new term is produced twice (matrix
/// product and three-term recurrence) and compared.
pub struct MarkoffSequence {
    seed: SeedPair,
    terms: RwLock<Arc<Vec<Arc<SymMat2>>>>,
    writer: Mutex<()>,
    cap: usize,
}

impl Clone for MarkoffSequence {
    fn clone(&self) -> Self {
        MarkoffSequence {
            seed: self.seed.clone(),
            terms: RwLock::new(self.snapshot_arc()),
            writer: Mutex::new(()),
            cap: self.cap,
        }
    }
}

impl std::fmt::Debug for MarkoffSequence {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("MarkoffSequence")
            .field("seed", &(&self.seed.x1, &self.seed.x2))
            .field("materialized", &self.len())
            .field("cap", &self.cap)
            .finish()
    }
}

impl MarkoffSequence {
    pub fn new(seed: SeedPair) -> Self {
        let terms = vec![Arc::new(seed.x1.clone()), Arc::new(seed.x2.clone())];
        MarkoffSequence {
            seed,
            terms: RwLock::new(Arc::new(terms)),
            writer: Mutex::new(()),
            cap: DEFAULT_CAP,
        }
    }

    pub fn canonical() -> Self {
        Self::new(SeedPair::canonical())
    }

    /// Rebuilds a sequence from stored terms, re-deriving every term past the
    /// seed and rejecting any disagreement.
    pub fn from_terms(terms: Vec<SymMat2>) -> Result<Self> {
        if terms.len() < 2 {
            return Err(Error::IndexOutOfRange(
                "a sequence needs at least its two seed terms".into(),
            ));
        }
        let seed = SeedPair::new(terms[0].clone(), terms[1].clone())?;
        let seq = Self::new(seed).with_cap(terms.len().max(DEFAULT_CAP));
        let view = seq.view(terms.len())?;
        for (k, t) in terms.iter().enumerate().skip(2) {
            if view.mat(k + 1) != t {
                return Err(Error::OracleMismatch(format!(
                    "stored term {} does not follow from the seed recurrence",
                    k + 1
                )));
            }
        }
        Ok(seq)
    }

    /// Raises (or lowers) the largest index that may be materialized.
    pub fn with_cap(mut self, cap: usize) -> Self {
        self.cap = cap.max(2);
        self
    }

    pub fn cap(&self) -> usize {
        self.cap
    }

    pub fn seed(&self) -> &SeedPair {
        &self.seed
    }

    /// Number of materialized terms.
    pub fn len(&self) -> usize {
        self.snapshot_arc().len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    fn snapshot_arc(&self) -> Arc<Vec<Arc<SymMat2>>> {
        self.terms.read().expect("term lock poisoned").clone()
    }

    /// Snapshot of whatever is materialized now.
    pub fn current(&self) -> TermsView {
        TermsView {
            terms: self.snapshot_arc(),
        }
    }

    /// Snapshot with at least `upto` terms, extending if necessary.
    pub fn view(&self, upto: usize) -> Result<TermsView> {
        self.extend_to(upto)?;
        Ok(self.current())
    }

    pub fn term(&self, k: usize) -> Result<Arc<SymMat2>> {
        let view = self.view(k)?;
        view.require(k, k)?;
        Ok(view.terms[k - 1].clone())
    }

    /// Materializes terms `1..=upto`.
    pub fn extend_to(&self, upto: usize) -> Result<()> {
        if upto <= self.len() {
            return Ok(());
        }
        if upto > self.cap {
            return Err(Error::IndexOutOfRange(format!(
                "term {upto} requested beyond the cap {} (raise it explicitly)",
                self.cap
            )));
        }
        let _guard = self.writer.lock().expect("writer lock poisoned");
        let mut current = self.snapshot_arc();
        while current.len() < upto {
            let next = next_term(&current)?;
            let mut grown = Vec::with_capacity(current.len() + 1);
            grown.extend(current.iter().cloned());
            grown.push(Arc::new(next));
            current = Arc::new(grown);
            *self.terms.write().expect("term lock poisoned") = current.clone();
        }
        Ok(())
    }
}

/// Computes `x_{k+2}` from the terms `x_1..x_{k+1}` by both formulas.
fn next_term(terms: &[Arc<SymMat2>]) -> Result<SymMat2> {
    let n = terms.len();
    let k = n - 1;
    let (xk, xk1) = (&terms[k - 1], &terms[k]);
    let (product, check) = rayon::join(
        || CompanionMatrix::for_index(k).right_mul(xk).mul(&Mat2::from(xk1.as_ref())),
        || {
            if k >= 2 {
                let scaled = Mat2::from(xk1.as_ref()).scale(&Integer::from(&xk.x0 * 3));
                scaled.sub(&Mat2::from(terms[k - 2].as_ref()))
            } else {
                CompanionMatrix::for_index(k + 1)
                    .right_mul(xk1)
                    .mul(&Mat2::from(xk.as_ref()))
            }
        },
    );
    if product != check {
        return Err(Error::OracleMismatch(format!(
            "term {}: matrix product and recurrence disagree (seed violates commutation?)",
            k + 2
        )));
    }
    SymMat2::try_from_mat(product).map_err(|e| match e {
        Error::InvariantViolation(msg) => {
            Error::InvariantViolation(format!("term {}: {msg}", k + 2))
        }
        other => other,
    })
}

/// Materializes terms up to `upto_k` and returns the snapshot.
pub fn extend_sequence(seq: &MarkoffSequence, upto_k: usize) -> Result<TermsView> {
    if upto_k < 2 {
        return Err(Error::IndexOutOfRange(format!(
            "upto_k must be at least 2, got {upto_k}"
        )));
    }
    seq.view(upto_k)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn canonical_terms() {
        let seq = MarkoffSequence::canonical();
        let v = seq.view(7).unwrap();
        let expect = [
            (1, [1, 0, 1]),
            (2, [1, 1, 2]),
            (3, [2, 1, 1]),
            (4, [5, 3, 2]),
            (5, [29, 17, 10]),
            (6, [433, 254, 149]),
            (7, [37666, 22095, 12961]),
        ];
        for (k, e) in expect {
            let m = v.mat(k);
            assert_eq!([m.x0.to_i64(), m.x1.to_i64(), m.x2.to_i64()], e.map(Some), "x_{k}");
        }
    }

    #[test]
    fn upto_two_is_the_seed() {
        let seq = MarkoffSequence::canonical();
        let v = extend_sequence(&seq, 2).unwrap();
        assert_eq!(v.len(), 2);
        assert_eq!(v.mat(2), &seq.seed().x2);
    }

    #[test]
    fn cap_is_enforced() {
        let seq = MarkoffSequence::canonical().with_cap(10);
        assert_eq!(seq.view(11).unwrap_err().name(), "IndexOutOfRange");
        assert!(seq.view(10).is_ok());
    }

    #[test]
    fn bad_seed_is_caught_by_the_cross_check() {
        let x1 = SymMat2::identity();
        let x2 = SymMat2::from_i64(2, -1, 1).unwrap();
        assert!(SeedPair::new(x1.clone(), x2.clone()).is_err());
        let seq = MarkoffSequence::new(SeedPair::unchecked(x1, x2));
        let err = seq.view(3).unwrap_err();
        assert!(matches!(err.name(), "OracleMismatch" | "InvariantViolation"), "{err}");
    }

    #[test]
    fn canonical_seed_is_admissible() {
        let seed = SeedPair::canonical();
        assert!(seed.admissible);
        assert_eq!(seed.first_valid_index, 3);
    }

    #[test]
    fn from_terms_rejects_tampering() {
        let seq = MarkoffSequence::canonical();
        let v = seq.view(6).unwrap();
        let mut terms: Vec<SymMat2> = v.iter().map(|(_, t)| t.clone()).collect();
        assert!(MarkoffSequence::from_terms(terms.clone()).is_ok());
        terms[4] = SymMat2::from_i64(29, 17, 10).unwrap();
        terms[5] = SymMat2::from_i64(5, 3, 2).unwrap();
        assert_eq!(
            MarkoffSequence::from_terms(terms).unwrap_err().name(),
            "OracleMismatch"
        );
    }
}
