//! Exact polynomial vector fields on the model charts: brackets, rank at
//! points, tangency to the cubic surface, and the built-in frame and
//! symmetry fields.

pub mod poly;

use crate::liealg::LieAlgebra;
use crate::linalg::{self, Matrix};
use crate::rational::GaussRat;
use poly::{parse_poly, MultiPoly, U1, VARS, W1, Z, ZB};
use std::collections::BTreeMap;
use std::fmt;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum VecFieldError {
    #[error("fields live on different charts")]
    ChartMismatch,
    #[error("bracket [{0}, {1}] leaves the span; remainder {2}")]
    OutsideSpan(String, String, String),
    #[error("bad surface document: {0}")]
    BadSurface(String),
}

/// The two charts in play: the intrinsic surface chart and the ambient
/// holomorphic chart.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Chart {
    Surface,
    Holomorphic,
}

impl Chart {
    /// Indices into the global variable pool, in component order.
    pub fn coords(self) -> &'static [usize] {
        match self {
            Chart::Surface => &[Z, ZB, U1, U1 + 1, U1 + 2],
            Chart::Holomorphic => &[Z, W1, W1 + 1, W1 + 2],
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VectorField {
    pub chart: Chart,
    pub name: String,
    comps: Vec<MultiPoly>,
}

impl VectorField {
    pub fn new(chart: Chart, name: &str, comps: Vec<MultiPoly>) -> Self {
        assert_eq!(comps.len(), chart.coords().len());
        VectorField {
            chart,
            name: name.into(),
            comps,
        }
    }

    pub fn comp(&self, k: usize) -> &MultiPoly {
        &self.comps[k]
    }

    /// Applies the field as a derivation to a scalar polynomial.
    pub fn apply(&self, f: &MultiPoly) -> MultiPoly {
        let mut out = MultiPoly::zero();
        for (c, &v) in self.comps.iter().zip(self.chart.coords()) {
            out = out.add(&c.mul(&f.diff(v)));
        }
        out
    }

    pub fn bracket(&self, other: &VectorField) -> Result<VectorField, VecFieldError> {
        if self.chart != other.chart {
            return Err(VecFieldError::ChartMismatch);
        }
        let comps = self
            .comps
            .iter()
            .zip(&other.comps)
            .map(|(xc, yc)| self.apply(yc).sub(&other.apply(xc)))
            .collect();
        Ok(VectorField::new(
            self.chart,
            &format!("[{}, {}]", self.name, other.name),
            comps,
        ))
    }

    pub fn scale(&self, c: &GaussRat) -> VectorField {
        VectorField {
            chart: self.chart,
            name: self.name.clone(),
            comps: self.comps.iter().map(|p| p.scale(c)).collect(),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.comps.iter().all(|c| c.is_zero())
    }

    /// Conjugate field on the surface chart: the ∂z and ∂zb slots swap.
    pub fn conj_surface(&self) -> VectorField {
        assert_eq!(self.chart, Chart::Surface);
        let mut comps: Vec<MultiPoly> = self.comps.iter().map(|c| c.conj()).collect();
        comps.swap(0, 1);
        VectorField {
            chart: Chart::Surface,
            name: bar_name(&self.name),
            comps,
        }
    }

    pub fn eval(&self, point: &[GaussRat; 11]) -> Vec<GaussRat> {
        self.comps.iter().map(|c| c.eval(point)).collect()
    }

    pub fn vanishes_at(&self, point: &[GaussRat; 11]) -> bool {
        self.eval(point).iter().all(|c| c.is_zero())
    }
}

fn bar_name(n: &str) -> String {
    format!("{}\u{0304}", n)
}

impl fmt::Display for VectorField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (c, &v) in self.comps.iter().zip(self.chart.coords()) {
            if c.is_zero() {
                continue;
            }
            if !first {
                write!(f, " + ")?;
            }
            write!(f, "({})·∂/∂{}", c, VARS[v])?;
            first = false;
        }
        if first {
            write!(f, "0")?;
        }
        Ok(())
    }
}

/// Rank of the evaluated coefficient matrix at a point.
pub fn rank_at_point(fields: &[VectorField], point: &[GaussRat; 11]) -> usize {
    let m: Matrix = fields.iter().map(|x| x.eval(point)).collect();
    linalg::rank(&m)
}

/// Expands every pairwise bracket of the labelled fields over their own
/// span by an exact linear solve on polynomial coefficients. The result
/// is the constants table c[i][j] with [X_i, X_j] = Σ_k c[i][j][k] X_k.
pub fn commutator_table(fields: &[VectorField]) -> Result<Vec<Vec<Vec<GaussRat>>>, VecFieldError> {
    let n = fields.len();
    let mut table = vec![vec![Vec::new(); n]; n];
    for i in 0..n {
        for j in 0..n {
            if i == j {
                table[i][j] = vec![GaussRat::zero(); n];
                continue;
            }
            let b = fields[i].bracket(&fields[j])?;
            let coords = expand_in_span(fields, &b)?;
            table[i][j] = coords;
        }
    }
    Ok(table)
}

/// Solves B = Σ c_k X_k exactly; errors if B is outside the span.
pub fn expand_in_span(
    fields: &[VectorField],
    b: &VectorField,
) -> Result<Vec<GaussRat>, VecFieldError> {
    // rows: every (component, monomial) pair occurring anywhere
    let ncomp = b.chart.coords().len();
    let mut keys: Vec<(usize, poly::ExpVec)> = Vec::new();
    let mut seen = std::collections::BTreeSet::new();
    for f in fields.iter().chain(std::iter::once(b)) {
        for k in 0..ncomp {
            for (e, _) in f.comp(k).terms() {
                if seen.insert((k, *e)) {
                    keys.push((k, *e));
                }
            }
        }
    }
    let mut a: Matrix = Vec::with_capacity(keys.len());
    let mut rhs = Vec::with_capacity(keys.len());
    for (k, e) in &keys {
        let row: Vec<GaussRat> = fields
            .iter()
            .map(|f| {
                f.comp(*k)
                    .terms()
                    .find(|(fe, _)| *fe == e)
                    .map(|(_, c)| c.clone())
                    .unwrap_or_else(GaussRat::zero)
            })
            .collect();
        a.push(row);
        rhs.push(
            b.comp(*k)
                .terms()
                .find(|(fe, _)| *fe == e)
                .map(|(_, c)| c.clone())
                .unwrap_or_else(GaussRat::zero),
        );
    }
    linalg::solve(&a, &rhs).ok_or_else(|| {
        VecFieldError::OutsideSpan(String::new(), String::new(), b.to_string())
    })
}

/// Builds a structure-constants algebra from a computed commutator table.
pub fn table_to_algebra(
    labels: &[&str],
    table: &[Vec<Vec<GaussRat>>],
) -> LieAlgebra {
    let n = labels.len();
    let mut entries = Vec::new();
    for i in 0..n {
        for j in (i + 1)..n {
            let coeffs: Vec<(usize, GaussRat)> = table[i][j]
                .iter()
                .enumerate()
                .filter(|(_, c)| !c.is_zero())
                .map(|(k, c)| (k, c.clone()))
                .collect();
            if !coeffs.is_empty() {
                entries.push((i, j, coeffs));
            }
        }
    }
    LieAlgebra::new(n, labels.iter().map(|s| s.to_string()).collect(), entries).unwrap()
}

/// The cubic model surface: graph maps v_j = φ_j(z, zb).
pub struct ModelSurface {
    pub phi: [MultiPoly; 3],
}

impl ModelSurface {
    pub fn cubic() -> Self {
        let z = MultiPoly::var(Z);
        let zb = MultiPoly::var(ZB);
        let phi1 = z.mul(&zb);
        let phi2 = z.mul(&z).mul(&zb).add(&z.mul(&zb).mul(&zb));
        let phi3 = z
            .mul(&z)
            .mul(&zb)
            .sub(&z.mul(&zb).mul(&zb))
            .scale(&GaussRat::i().neg());
        ModelSurface {
            phi: [phi1, phi2, phi3],
        }
    }

    /// `{equations: [...]}` with polynomial strings in z, zb.
    pub fn from_json(doc: &str) -> Result<Self, VecFieldError> {
        let v: serde_json::Value =
            serde_json::from_str(doc).map_err(|e| VecFieldError::BadSurface(e.to_string()))?;
        let eqs = v["equations"]
            .as_array()
            .filter(|a| a.len() == 3)
            .ok_or_else(|| VecFieldError::BadSurface("need 3 equations".into()))?;
        let mut phi = Vec::new();
        for e in eqs {
            let s = e
                .as_str()
                .ok_or_else(|| VecFieldError::BadSurface("equations are strings".into()))?;
            phi.push(parse_poly(s).map_err(VecFieldError::BadSurface)?);
        }
        let phi: [MultiPoly; 3] = phi.try_into().unwrap();
        for (j, p) in phi.iter().enumerate() {
            if p.conj() != *p {
                return Err(VecFieldError::BadSurface(format!(
                    "equation {} is not real",
                    j + 1
                )));
            }
            if p.support().iter().any(|&v| v != Z && v != ZB) {
                return Err(VecFieldError::BadSurface(format!(
                    "equation {} uses variables outside (z, zb)",
                    j + 1
                )));
            }
        }
        Ok(ModelSurface { phi })
    }

    pub fn all_real(&self) -> bool {
        self.phi.iter().all(|p| p.conj() == *p)
    }
}

/// Tangency of the real part of a holomorphic-chart field to the surface:
/// applies X + X̄ to each r_j = v_j − φ_j and eliminates w_k along the
/// graph. All three residues must vanish identically.
pub fn check_tangency(x: &VectorField, m: &ModelSurface) -> bool {
    tangency_residues(x, m).iter().all(|r| r.is_zero())
}

pub fn tangency_residues(x: &VectorField, m: &ModelSurface) -> Vec<MultiPoly> {
    assert_eq!(x.chart, Chart::Holomorphic);
    // w_k -> u_k + i φ_k and wb_k -> u_k − i φ_k
    let mut on_graph: BTreeMap<usize, MultiPoly> = BTreeMap::new();
    for k in 0..3 {
        let u = MultiPoly::var(U1 + k);
        let iphi = m.phi[k].scale(&GaussRat::i());
        on_graph.insert(W1 + k, u.add(&iphi));
        on_graph.insert(W1 + 3 + k, u.sub(&iphi));
    }
    let f0 = x.comp(0).subst(&on_graph);
    let f0b = x.comp(0).conj().subst(&on_graph);
    let half_over_i = GaussRat::from_parts(0, 1, -1, 2); // 1/(2i)
    (0..3)
        .map(|j| {
            let fj = x.comp(j + 1).subst(&on_graph);
            let fjb = x.comp(j + 1).conj().subst(&on_graph);
            fj.sub(&fjb)
                .scale(&half_over_i)
                .sub(&f0.mul(&m.phi[j].diff(Z)))
                .sub(&f0b.mul(&m.phi[j].diff(ZB)))
        })
        .collect()
}

/// The printed intrinsic frame on the surface chart, in the order
/// (L, L̄, T, S, S̄).
pub fn model_frame() -> [VectorField; 5] {
    let z = MultiPoly::var(Z);
    let zb = MultiPoly::var(ZB);
    let i = GaussRat::i;
    let zero = MultiPoly::zero;
    let one = MultiPoly::one;
    let two_zzb = z.mul(&zb).scale(&GaussRat::from_int(2));
    let l = VectorField::new(
        Chart::Surface,
        "L",
        vec![
            one(),
            zero(),
            zb.scale(&i()),
            two_zzb.add(&zb.mul(&zb)).scale(&i()),
            two_zzb.sub(&zb.mul(&zb)),
        ],
    );
    let lb = l.conj_surface();
    let t = VectorField::new(
        Chart::Surface,
        "T",
        vec![
            zero(),
            zero(),
            MultiPoly::constant(GaussRat::from_int(2)),
            z.add(&zb).scale(&GaussRat::from_int(4)),
            z.sub(&zb).scale(&GaussRat::from_parts(0, 1, -4, 1)),
        ],
    );
    let s = VectorField::new(
        Chart::Surface,
        "S",
        vec![
            zero(),
            zero(),
            zero(),
            MultiPoly::constant(GaussRat::from_int(4)),
            MultiPoly::constant(GaussRat::from_parts(0, 1, -4, 1)),
        ],
    );
    let sb = s.conj_surface();
    [l, lb, t, s, sb]
}

/// The adapted frame built from L alone: T := i[L, L̄], S := [L, T],
/// S̄ := [L̄, T]. Used to audit the printed frame.
pub fn adapted_frame(l: &VectorField) -> [VectorField; 3] {
    let lb = l.conj_surface();
    let t = l.bracket(&lb).unwrap().scale(&GaussRat::i());
    let s = l.bracket(&t).unwrap();
    let sb = lb.bracket(&t).unwrap();
    [t, s, sb]
}

pub const AUTOMORPHISM_LABELS: [&str; 7] = ["S2", "S1", "T", "L2", "L1", "D", "R"];

/// The 7 holomorphic symmetry generators, in table order.
pub fn automorphisms() -> [VectorField; 7] {
    let z = MultiPoly::var(Z);
    let w1 = MultiPoly::var(W1);
    let w2 = MultiPoly::var(W1 + 1);
    let w3 = MultiPoly::var(W1 + 2);
    let zero = MultiPoly::zero;
    let one = MultiPoly::one;
    let i = GaussRat::i;
    let z2 = z.mul(&z);
    let s2 = VectorField::new(Chart::Holomorphic, "S2", vec![zero(), zero(), zero(), one()]);
    let s1 = VectorField::new(Chart::Holomorphic, "S1", vec![zero(), zero(), one(), zero()]);
    let t = VectorField::new(Chart::Holomorphic, "T", vec![zero(), one(), zero(), zero()]);
    let l1 = VectorField::new(
        Chart::Holomorphic,
        "L1",
        vec![
            one(),
            z.scale(&GaussRat::from_parts(0, 1, 2, 1)),
            z2.scale(&GaussRat::from_parts(0, 1, 2, 1))
                .add(&w1.scale(&GaussRat::from_int(4))),
            z2.scale(&GaussRat::from_int(2)),
        ],
    );
    let l2 = VectorField::new(
        Chart::Holomorphic,
        "L2",
        vec![
            MultiPoly::constant(i()),
            z.scale(&GaussRat::from_int(2)),
            z2.scale(&GaussRat::from_int(2)),
            z2.scale(&GaussRat::from_parts(0, 1, -2, 1))
                .add(&w1.scale(&GaussRat::from_int(4))),
        ],
    );
    let d = VectorField::new(
        Chart::Holomorphic,
        "D",
        vec![
            z.clone(),
            w1.scale(&GaussRat::from_int(2)),
            w2.scale(&GaussRat::from_int(3)),
            w3.scale(&GaussRat::from_int(3)),
        ],
    );
    let r = VectorField::new(
        Chart::Holomorphic,
        "R",
        vec![z.scale(&i()), zero(), w3.neg(), w2.clone()],
    );
    [s2, s1, t, l2, l1, d, r]
}

/// The printed commutator table, upper entries, in the order
/// (S2, S1, T, L2, L1, D, R).
pub fn printed_table() -> Vec<(usize, usize, Vec<(usize, GaussRat)>)> {
    let q = GaussRat::from_int;
    vec![
        (0, 5, vec![(0, q(3))]),
        (0, 6, vec![(1, q(-1))]),
        (1, 5, vec![(1, q(3))]),
        (1, 6, vec![(0, q(1))]),
        (2, 3, vec![(0, q(4))]),
        (2, 4, vec![(1, q(4))]),
        (2, 5, vec![(2, q(2))]),
        (3, 4, vec![(2, q(-4))]),
        (3, 5, vec![(3, q(1))]),
        (3, 6, vec![(4, q(-1))]),
        (4, 5, vec![(4, q(1))]),
        (4, 6, vec![(3, q(1))]),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;

    fn origin() -> [GaussRat; 11] {
        [(); 11].map(|_| GaussRat::zero())
    }

    #[test]
    fn adapted_frame_reproduces_the_printed_fields() {
        let frame = model_frame();
        let [t, s, sb] = adapted_frame(&frame[0]);
        assert_eq!(t.comps, frame[2].comps);
        assert_eq!(s.comps, frame[3].comps);
        assert_eq!(sb.comps, frame[4].comps);
    }

    #[test]
    fn frame_has_rank_five_everywhere_sampled() {
        let frame = model_frame();
        let mut pts = vec![origin()];
        for (re, im) in [(1i64, 0i64), (0, 1), (1, 1), (2, -1), (1, 2)] {
            let mut p = origin();
            p[Z] = GaussRat::from_parts(re, 1, im, 1);
            p[ZB] = p[Z].conj();
            pts.push(p);
        }
        for p in &pts {
            assert_eq!(rank_at_point(&frame, p), 5);
        }
        // constant pair has rank 2
        assert_eq!(rank_at_point(&frame[3..5], &origin()), 2);
        // duplication changes nothing
        let mut dup = frame.to_vec();
        dup.push(frame[0].clone());
        assert_eq!(rank_at_point(&dup, &origin()), 5);
    }

    #[test]
    fn bracket_is_antisymmetric_and_self_annihilating() {
        let auts = automorphisms();
        let b1 = auts[3].bracket(&auts[4]).unwrap();
        let b2 = auts[4].bracket(&auts[3]).unwrap();
        assert_eq!(b1.comps, b2.scale(&GaussRat::from_int(-1)).comps);
        assert!(auts[4].bracket(&auts[4]).unwrap().is_zero());
    }

    #[test]
    fn commutator_table_matches_the_printed_one() {
        let auts = automorphisms();
        let table = commutator_table(&auts).unwrap();
        let mut want = vec![vec![vec![GaussRat::zero(); 7]; 7]; 7];
        for (i, j, coeffs) in printed_table() {
            for (k, c) in coeffs {
                want[i][j][k] = c.clone();
                want[j][i][k] = c.neg();
            }
        }
        for i in 0..7 {
            for j in 0..7 {
                assert_eq!(table[i][j], want[i][j], "entry [{}, {}]", i, j);
            }
        }
    }

    #[test]
    fn all_seven_real_parts_are_tangent() {
        let m = ModelSurface::cubic();
        assert!(m.all_real());
        for x in automorphisms() {
            assert!(check_tangency(&x, &m), "field {}", x.name);
        }
    }

    #[test]
    fn a_transversal_field_is_not_tangent() {
        let m = ModelSurface::cubic();
        // i ∂/∂w1 moves v1 off the graph
        let bad = VectorField::new(
            Chart::Holomorphic,
            "iT",
            vec![
                MultiPoly::zero(),
                MultiPoly::constant(GaussRat::i()),
                MultiPoly::zero(),
                MultiPoly::zero(),
            ],
        );
        assert!(!check_tangency(&bad, &m));
    }

    #[test]
    fn exactly_d_and_r_vanish_at_the_origin() {
        let auts = automorphisms();
        let vanishing: Vec<&str> = auts
            .iter()
            .filter(|x| x.vanishes_at(&origin()))
            .map(|x| x.name.as_str())
            .collect();
        assert_eq!(vanishing, vec!["D", "R"]);
    }

    #[test]
    fn surface_loader_validates() {
        let good = r#"{"equations": ["z*zb", "z^2*zb + z*zb^2", "-i*(z^2*zb - z*zb^2)"]}"#;
        let m = ModelSurface::from_json(good).unwrap();
        assert_eq!(m.phi[0], ModelSurface::cubic().phi[0]);
        let complex = r#"{"equations": ["i*z*zb", "z", "zb"]}"#;
        assert!(ModelSurface::from_json(complex).is_err());
        let wrongvars = r#"{"equations": ["z*zb", "u1", "zb"]}"#;
        assert!(ModelSurface::from_json(wrongvars).is_err());
    }
}
