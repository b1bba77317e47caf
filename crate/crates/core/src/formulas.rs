//! Closed-form counts and probabilities, in exact arithmetic.
//!
//! Everything finite is a [`BigRational`] or [`BigUint`]. The two infinite
//! products are truncated at an index `M` with tail bound
//! `q^-M / (1 - q^-1) < tol` and reported together with `M`.

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::module::ModuleType;
use crate::ring::{is_prime, PolySpec};

pub type ExactRational = BigRational;

fn big(x: u64) -> BigUint {
    BigUint::from(x)
}

fn pow(q: u64, e: u64) -> BigUint {
    num_traits::pow(big(q), e as usize)
}

fn ratio(num: BigUint, den: BigUint) -> BigRational {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

fn expect_integer(x: &BigRational, what: &str) -> BigUint {
    assert!(x.is_integer(), "{what} is not an integer: {x}");
    x.to_integer().to_biguint().expect("nonnegative")
}

/// `|GL_r(F_q)| = prod_{i<r} (q^r - q^i)`.
pub fn gl_order(r: u32, q: u64) -> BigUint {
    let qr = pow(q, r as u64);
    (0..r).fold(BigUint::one(), |acc, i| acc * (&qr - pow(q, i as u64)))
}

/// `prod_{i=1}^{r} (1 - q^-i)` exactly.
pub fn finite_euler_product(r: u32, q: u64) -> BigRational {
    ratio(gl_order(r, q), pow(q, (r as u64) * (r as u64)))
}

/// `|Aut(G)|` for `G = ⊕ (S/p^e_i)^r_i` over a DVR `S` with residue field of
/// size `q`:
/// `prod_i q^(-r_i^2) |GL_r_i(F_q)| * prod_{i,j} q^(min(e_i, e_j) r_i r_j)`.
pub fn aut_count_formula(g: &ModuleType, q: u64) -> BigUint {
    let parts = g.parts();
    let mut exponent: u64 = 0;
    for a in parts {
        for b in parts {
            exponent += a.exponent.min(b.exponent) as u64 * a.multiplicity as u64 * b.multiplicity as u64;
        }
    }
    let mut gl = BigUint::one();
    for a in parts {
        exponent -= (a.multiplicity as u64).pow(2);
        gl *= gl_order(a.multiplicity, q);
    }
    gl * pow(q, exponent)
}

/// Number of `n x n` matrices of rank `r` over `F_q`.
pub fn rank_count_formula(n: u32, r: u32, q: u64) -> Result<BigUint> {
    if r > n {
        return Err(Error::InvalidInstance(format!("rank {r} exceeds dimension {n}")));
    }
    let lead = ratio(pow(q, (n * n - (n - r) * (n - r)) as u64), BigUint::one());
    let num = finite_euler_product(n, q) * tail_euler_product(n, r, q);
    let den = finite_euler_product(n - r, q) * finite_euler_product(r, q);
    Ok(expect_integer(&(lead * num / den), "rank count"))
}

/// `prod_{i=n-r+1}^{n} (1 - q^-i)`.
fn tail_euler_product(n: u32, r: u32, q: u64) -> BigRational {
    finite_euler_product(n, q) / finite_euler_product(n - r, q)
}

/// The per-polynomial factor `q^(r^2) prod_{i=1}^{r} (1 - q^-i)^2 / |Aut(G)|`,
/// with `r` the residue rank of `G`.
pub fn lift_factor(g: &ModuleType, q: u64) -> BigRational {
    let r = g.residue_rank();
    let gl = gl_order(r, q);
    ratio(&gl * &gl, pow(q, (r as u64) * (r as u64)) * aut_count_formula(g, q))
}

/// One polynomial `P_j` with its target module `G_j`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ProblemInstance {
    p: u64,
    polys: Vec<PolySpec>,
    targets: Vec<ModuleType>,
    n: u32,
    big_n: u32,
}

/// Non-fatal observations about an instance.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum InstanceWarning {
    /// `n < sum_j dim_{F_p}(G_j / p G_j)`: no residue matrix has the required
    /// ranks, so both sides of the lift count are zero even though the
    /// closed form is not.
    NoAdmissibleResidue { n: u32, needed: u32 },
}

impl std::fmt::Display for InstanceWarning {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            InstanceWarning::NoAdmissibleResidue { n, needed } => write!(
                f,
                "n = {n} is below the {needed} dimensions the targets need; no residue matrix is admissible"
            ),
        }
    }
}

impl ProblemInstance {
    pub fn new(p: u64, polys: Vec<PolySpec>, targets: Vec<ModuleType>, n: u32, big_n: u32) -> Result<Self> {
        if !is_prime(p) {
            return Err(Error::NotPrime(p));
        }
        if polys.is_empty() {
            return Err(Error::InvalidInstance("at least one polynomial is needed".into()));
        }
        if polys.len() != targets.len() {
            return Err(Error::InvalidInstance(format!(
                "{} polynomials but {} targets",
                polys.len(),
                targets.len()
            )));
        }
        for (j, poly) in polys.iter().enumerate() {
            if poly.p() != p {
                return Err(Error::InvalidInstance(format!("polynomial {poly} is over p = {}", poly.p())));
            }
            for other in &polys[..j] {
                if poly.same_residue(other) {
                    return Err(Error::DuplicateResidue {
                        first: other.to_string(),
                        second: poly.to_string(),
                        p,
                    });
                }
            }
        }
        for (j, (poly, g)) in polys.iter().zip(&targets).enumerate() {
            if g.residue_degree() as usize != poly.degree() {
                return Err(Error::InvalidInstance(format!(
                    "target {j} has residue degree {} but polynomial {poly} has degree {}",
                    g.residue_degree(),
                    poly.degree()
                )));
            }
            if !g.annihilated_by(big_n) {
                return Err(Error::InvalidInstance(format!("target {j} ({g}) is not killed by p^{big_n}")));
            }
        }
        Ok(ProblemInstance {
            p,
            polys,
            targets,
            n,
            big_n,
        })
    }

    /// Parses polynomials as coefficient lists and targets in the `e^r`
    /// grammar, each target over the residue degree of its polynomial.
    pub fn parse(p: u64, polys: &[&str], targets: &[&str], n: u32, big_n: u32) -> Result<Self> {
        let polys = polys.iter().map(|s| PolySpec::parse(s, p)).collect::<Result<Vec<_>>>()?;
        if polys.len() != targets.len() {
            return Err(Error::InvalidInstance(format!(
                "{} polynomials but {} targets",
                polys.len(),
                targets.len()
            )));
        }
        let targets = polys
            .iter()
            .zip(targets)
            .map(|(poly, t)| ModuleType::parse(t, poly.degree() as u32))
            .collect::<Result<Vec<_>>>()?;
        ProblemInstance::new(p, polys, targets, n, big_n)
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn polys(&self) -> &[PolySpec] {
        &self.polys
    }

    pub fn targets(&self) -> &[ModuleType] {
        &self.targets
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    /// The annihilation depth `N`.
    pub fn big_n(&self) -> u32 {
        self.big_n
    }

    /// `q_j = p^deg(P_j)`.
    pub fn q(&self, j: usize) -> u64 {
        self.p.pow(self.polys[j].degree() as u32)
    }

    /// `sum_j dim_{F_p}(G_j / p G_j)`.
    pub fn needed_dimension(&self) -> u32 {
        self.targets.iter().map(|g| g.residue_rank() * g.residue_degree()).sum()
    }

    pub fn warnings(&self) -> Vec<InstanceWarning> {
        let needed = self.needed_dimension();
        let mut out = Vec::new();
        if self.n < needed {
            out.push(InstanceWarning::NoAdmissibleResidue { n: self.n, needed });
        }
        out
    }

    pub fn with_targets(&self, targets: Vec<ModuleType>) -> Result<ProblemInstance> {
        ProblemInstance::new(self.p, self.polys.clone(), targets, self.n, self.big_n)
    }

    pub fn describe(&self) -> String {
        let polys = self.polys.iter().map(|p| format!("[{p}]")).collect::<Vec<_>>().join(" ");
        let targets = self.targets.iter().map(|g| g.to_string()).collect::<Vec<_>>().join(" ");
        format!(
            "p={} n={} N={} polys={polys} targets={targets}",
            self.p, self.n, self.big_n
        )
    }
}

#[derive(Clone, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
struct InstanceRepr {
    p: u64,
    polys: Vec<String>,
    targets: Vec<String>,
    n: u32,
    #[serde(rename = "N")]
    big_n: u32,
}

impl Serialize for ProblemInstance {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        InstanceRepr {
            p: self.p,
            polys: self.polys.iter().map(|p| p.to_string()).collect(),
            targets: self.targets.iter().map(|g| g.to_string()).collect(),
            n: self.n,
            big_n: self.big_n,
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for ProblemInstance {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let repr = InstanceRepr::deserialize(d)?;
        let polys: Vec<&str> = repr.polys.iter().map(String::as_str).collect();
        let targets: Vec<&str> = repr.targets.iter().map(String::as_str).collect();
        ProblemInstance::parse(repr.p, &polys, &targets, repr.n, repr.big_n).map_err(serde::de::Error::custom)
    }
}

/// Number of lifts `X` of an admissible residue matrix to `Z/p^(N+1)` with
/// `cok(P_j(X)) ≅ G_j` for every `j`:
/// `p^(N n^2) prod_j q_j^(r_j^2) prod_{i<=r_j} (1 - q_j^-i)^2 / |Aut(G_j)|`.
pub fn main3_count(inst: &ProblemInstance) -> BigUint {
    let lead = ratio(pow(inst.p, (inst.big_n as u64) * (inst.n as u64).pow(2)), BigUint::one());
    expect_integer(&(lead * main2_factor(inst)), "lift count")
}

/// `prod_j q_j^(r_j^2) prod_{i<=r_j} (1 - q_j^-i)^2 / |Aut(G_j)|`, the ratio
/// between the probability mod `p^(N+1)` and the residue probability.
pub fn main2_factor(inst: &ProblemInstance) -> BigRational {
    inst.targets
        .iter()
        .enumerate()
        .fold(BigRational::one(), |acc, (j, g)| acc * lift_factor(g, inst.q(j)))
}

/// Predicted probability mod `p^(N+1)`, from a residue probability.
pub fn main2_check_rhs(inst: &ProblemInstance, residue_probability: &BigRational) -> BigRational {
    main2_factor(inst) * residue_probability
}

/// A truncated infinite product.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LimitValue {
    pub value: f64,
    pub truncation_index: u32,
}

/// Smallest `M` with `q^-M / (1 - q^-1) < tol`.
pub fn truncation_index(q: u64, tol: f64) -> u32 {
    assert!(tol > 0.0, "tolerance must be positive");
    let qf = q as f64;
    let mut m = 1;
    while qf.powi(-(m as i32)) / (1.0 - 1.0 / qf) >= tol {
        m += 1;
    }
    m
}

/// `prod_{i=1}^{M} (1 - q^-i)`.
pub fn euler_product(q: u64, m: u32) -> f64 {
    let qf = q as f64;
    (1..=m).map(|i| 1.0 - qf.powi(-(i as i32))).product()
}

fn truncate_all(qs: &[u64], tol: f64) -> u32 {
    qs.iter().map(|&q| truncation_index(q, tol)).max().unwrap_or(1)
}

/// `prod_j |Aut(G_j)|^-1 prod_{i>=1} (1 - q_j^-i)`, the limiting joint
/// probability as `n -> ∞`.
pub fn main_limit(inst: &ProblemInstance, tol: f64) -> LimitValue {
    let qs: Vec<u64> = (0..inst.polys.len()).map(|j| inst.q(j)).collect();
    let m = truncate_all(&qs, tol);
    let value = inst
        .targets
        .iter()
        .zip(&qs)
        .map(|(g, &q)| euler_product(q, m) / aut_count_formula(g, q).to_f64().unwrap_or(f64::INFINITY))
        .product();
    LimitValue {
        value,
        truncation_index: m,
    }
}

/// `prod_j q_j^(-r_j^2) prod_{i>=1} (1 - q_j^-i) / prod_{i<=r_j} (1 - q_j^-i)^2`,
/// the limiting probability that `cok(P_j(X))` has `F_{q_j}`-dimension `r_j`
/// for all `j`, with `q_j = p^(d_j)`.
pub fn cl_limit(p: u64, degrees: &[u32], ranks: &[u32], tol: f64) -> Result<LimitValue> {
    if degrees.len() != ranks.len() {
        return Err(Error::InvalidInstance("degrees and ranks differ in length".into()));
    }
    let qs: Vec<u64> = degrees.iter().map(|&d| p.pow(d)).collect();
    let m = truncate_all(&qs, tol);
    let value = qs
        .iter()
        .zip(ranks)
        .map(|(&q, &r)| {
            let finite = finite_euler_product(r, q).to_f64().unwrap_or(0.0);
            (q as f64).powi(-((r * r) as i32)) * euler_product(q, m) / (finite * finite)
        })
        .product();
    Ok(LimitValue {
        value,
        truncation_index: m,
    })
}

/// Number of `X ∈ Mat_n(S/p^(N+1))` lifting a fixed residue `X̄` with
/// `cok(X - α) ≅ G`, for `S` unramified with residue field of size `q` and
/// `X̄ - ᾱ` of corank `r(G)`: `q^(N n^2) q^(r^2) prod_{i<=r}(1 - q^-i)^2 / |Aut(G)|`.
pub fn l1deg1_count(g: &ModuleType, q: u64, big_n: u32, n: u32) -> Result<BigUint> {
    if !g.annihilated_by(big_n) {
        return Err(Error::InvalidInstance(format!("{g} is not killed by p^{big_n}")));
    }
    let lead = ratio(pow(q, (big_n as u64) * (n as u64).pow(2)), BigUint::one());
    Ok(expect_integer(&(lead * lift_factor(g, q)), "lift count"))
}

/// Renders an exact rational as `"a/b"`, or `"a"` for integers.
pub fn rational_text(x: &BigRational) -> String {
    if x.is_integer() {
        x.to_integer().to_string()
    } else {
        format!("{}/{}", x.numer(), x.denom())
    }
}

pub fn parse_rational(text: &str) -> Result<BigRational> {
    let bad = || Error::parse(format!("bad rational {text:?}"));
    let (num, den) = match text.trim().split_once('/') {
        Some((a, b)) => (a.trim(), b.trim()),
        None => (text.trim(), "1"),
    };
    let num: BigInt = num.parse().map_err(|_| bad())?;
    let den: BigInt = den.parse().map_err(|_| bad())?;
    if den.is_zero() {
        return Err(bad());
    }
    Ok(BigRational::new(num, den))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn g(text: &str, d: u32) -> ModuleType {
        ModuleType::parse(text, d).unwrap()
    }

    fn r(a: i64, b: i64) -> BigRational {
        BigRational::new(a.into(), b.into())
    }

    #[test]
    fn automorphism_examples() {
        assert_eq!(aut_count_formula(&g("1^1", 1), 2), big(1));
        assert_eq!(aut_count_formula(&g("2^1,1^1", 1), 2), big(8));
        assert_eq!(aut_count_formula(&g("1^1", 2), 4), big(3));
        assert_eq!(aut_count_formula(&g("1^2", 1), 2), big(6));
        assert_eq!(aut_count_formula(&g("0", 1), 7), big(1));
    }

    #[test]
    fn rank_examples() {
        let counts: Vec<BigUint> = (0..=2).map(|r| rank_count_formula(2, r, 2).unwrap()).collect();
        assert_eq!(counts, vec![big(1), big(9), big(6)]);
        assert!(rank_count_formula(2, 3, 2).is_err());
        for q in [2, 3, 4, 5] {
            for n in 0..=4 {
                let total: BigUint = (0..=n).map(|r| rank_count_formula(n, r, q).unwrap()).sum();
                assert_eq!(total, pow(q, (n * n) as u64));
            }
        }
    }

    #[test]
    fn lift_count_examples() {
        let one = ProblemInstance::parse(2, &["0,1"], &["1^1"], 1, 1).unwrap();
        assert_eq!(main3_count(&one), big(1));
        let quad = ProblemInstance::parse(2, &["1,1,1"], &["1^1"], 2, 1).unwrap();
        assert_eq!(main3_count(&quad), big(12));
        let joint = ProblemInstance::parse(2, &["0,1", "-1,1"], &["1^1", "1^1"], 2, 1).unwrap();
        assert_eq!(main3_count(&joint), big(4));
        assert_eq!(main2_factor(&joint), r(1, 4));
        // Six residue matrices have eigenvalues {0, 1}, each with 4 lifts.
        let lhs = ratio(big(6) * main3_count(&joint), pow(2, 8));
        assert_eq!(main2_check_rhs(&joint, &r(6, 16)), lhs);
    }

    #[test]
    fn factor_examples() {
        let trivial = ProblemInstance::parse(3, &["1,1"], &["0"], 2, 1).unwrap();
        assert_eq!(main2_factor(&trivial), r(1, 1));
        let cyclic = ProblemInstance::parse(2, &["0,1"], &["1^1"], 1, 1).unwrap();
        assert_eq!(main2_factor(&cyclic), r(1, 2));
    }

    #[test]
    fn instance_validation() {
        assert!(ProblemInstance::parse(2, &["0,1", "2,1"], &["0", "0"], 2, 1).is_err());
        assert!(ProblemInstance::parse(2, &["0,1"], &["2^1"], 2, 1).is_err());
        assert!(ProblemInstance::parse(2, &["0,1"], &["1^1", "1^1"], 2, 1).is_err());
        assert!(ProblemInstance::parse(4, &["0,1"], &["0"], 2, 1).is_err());
        let thin = ProblemInstance::parse(2, &["1,1,1"], &["1^1"], 1, 1).unwrap();
        assert_eq!(thin.warnings(), vec![InstanceWarning::NoAdmissibleResidue { n: 1, needed: 2 }]);
        let json = serde_json::to_string(&thin).unwrap();
        assert_eq!(serde_json::from_str::<ProblemInstance>(&json).unwrap(), thin);
    }

    #[test]
    fn limits() {
        let inst = ProblemInstance::parse(2, &["0,1"], &["0"], 1, 1).unwrap();
        let lim = main_limit(&inst, 1e-9);
        assert!((lim.value - 0.288_788_095_1).abs() < 1e-9);
        assert!((lim.value - euler_product(2, 40)).abs() < 1e-9);
        let cl = cl_limit(3, &[2], &[0], 1e-12).unwrap();
        assert!((cl.value - euler_product(9, 60)).abs() < 1e-12);
        let joint = ProblemInstance::parse(2, &["0,1", "1,1"], &["1^1", "0"], 4, 1).unwrap();
        let a = main_limit(&ProblemInstance::parse(2, &["0,1"], &["1^1"], 4, 1).unwrap(), 1e-12).value;
        let b = main_limit(&ProblemInstance::parse(2, &["1,1"], &["0"], 4, 1).unwrap(), 1e-12).value;
        assert!((main_limit(&joint, 1e-12).value - a * b).abs() < 1e-12);
    }

    #[test]
    fn limit_consistency() {
        let inst = ProblemInstance::parse(2, &["0,1", "1,1,1"], &["2^1,1^1", "1^1"], 4, 2).unwrap();
        let tol = 1e-10;
        let ranks: Vec<u32> = inst.targets().iter().map(|g| g.residue_rank()).collect();
        let cl = cl_limit(2, &[1, 2], &ranks, tol).unwrap().value;
        let lhs = main2_factor(&inst).to_f64().unwrap() * cl;
        assert!((lhs - main_limit(&inst, tol).value).abs() < 2.0 * tol);
    }

    #[test]
    fn dvr_counts() {
        assert_eq!(l1deg1_count(&g("0", 1), 2, 0, 1).unwrap(), big(1));
        assert_eq!(l1deg1_count(&g("1^1", 2), 4, 1, 1).unwrap(), big(3));
        let inst = ProblemInstance::parse(3, &["0,1"], &["1^2"], 3, 1).unwrap();
        assert_eq!(l1deg1_count(&g("1^2", 1), 3, 1, 3).unwrap(), main3_count(&inst));
        assert!(l1deg1_count(&g("2^1", 1), 2, 1, 1).is_err());
    }

    #[test]
    fn rational_text_round_trip() {
        for x in [r(3, 4), r(-5, 1), r(0, 1)] {
            assert_eq!(parse_rational(&rational_text(&x)).unwrap(), x);
        }
        assert!(parse_rational("1/0").is_err());
    }
}
