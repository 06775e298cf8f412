//! Membership tests for the basic neighbourhoods (K, ε)^gs, (K, ε)^ls, (K, ε)^ms and
//! (K, ε, A)^ss.
//!
//! No normal section is ever built. The section f and its derivative enter only
//! through ‖f(x)‖ = ‖x − y‖ and ‖τ∘Df(x)‖ = tan d₁(TₓW, T_yW′) at nearest-point
//! pairs x ← y, and the condition on W′ ∩ K is checked as "no orphans" plus
//! "coverage" with K dilated by the resolution h of W.

mod projection;

pub use projection::{displacement, tubular_projection, Pair, SheetDecomposition, RIGHT_ANGLE_SLACK};

use std::fmt;

use crate::error::{Error, Result};
use crate::manifolds::{CompactRegion, DiscretizedSubmanifold, LabeledSubmanifold};

/// (K, ε) with an optional label tolerance for the labelled variants.
#[derive(Debug, Clone, PartialEq)]
pub struct NeighborhoodSpec {
    pub k: CompactRegion,
    pub eps: f64,
    pub label_eps: Option<f64>,
}

impl NeighborhoodSpec {
    pub fn new(k: CompactRegion, eps: f64) -> Result<Self> {
        if !(eps.is_finite() && eps > 0.0) {
            return Err(Error::InvalidParameter(format!("eps must be positive, got {eps}")));
        }
        Ok(Self {
            k,
            eps,
            label_eps: None,
        })
    }

    pub fn with_label_eps(mut self, label_eps: f64) -> Result<Self> {
        if !(label_eps.is_finite() && label_eps > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "label tolerance must be positive, got {label_eps}"
            )));
        }
        self.label_eps = Some(label_eps);
        Ok(self)
    }

    /// ρ = max(ε, 2h).
    pub fn tube_radius(&self, w: &DiscretizedSubmanifold) -> f64 {
        self.eps.max(2.0 * w.resolution())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NeighborhoodKind {
    Gs,
    Ls,
    Ms,
    Ss,
}

impl fmt::Display for NeighborhoodKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            NeighborhoodKind::Gs => "gs",
            NeighborhoodKind::Ls => "ls",
            NeighborhoodKind::Ms => "ms",
            NeighborhoodKind::Ss => "ss",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Clause {
    pub name: &'static str,
    /// `None` when the clause holds, otherwise the reason it fails.
    pub failure: Option<String>,
}

/// Outcome of a membership test, clause by clause.
#[derive(Debug, Clone, PartialEq)]
pub struct MembershipReport {
    pub kind: NeighborhoodKind,
    pub clauses: Vec<Clause>,
    pub decomposition: SheetDecomposition,
}

impl MembershipReport {
    pub fn is_member(&self) -> bool {
        self.clauses.iter().all(|c| c.failure.is_none())
    }

    pub fn clause(&self, name: &str) -> Option<&Clause> {
        self.clauses.iter().find(|c| c.name == name)
    }
}

/// One line per clause: `<name>: PASS` or `<name>: FAIL <reason>`.
impl fmt::Display for MembershipReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.clauses {
            match &c.failure {
                None => writeln!(f, "{}: PASS", c.name)?,
                Some(reason) => writeln!(f, "{}: FAIL {}", c.name, reason)?,
            }
        }
        Ok(())
    }
}

fn clause(name: &'static str, failure: Option<String>) -> Clause {
    Clause { name, failure }
}

fn base_clauses(
    w: &DiscretizedSubmanifold,
    w_prime: &DiscretizedSubmanifold,
    spec: &NeighborhoodSpec,
    kind: NeighborhoodKind,
) -> Result<(Vec<Clause>, SheetDecomposition)> {
    let sd = tubular_projection(w, w_prime, &spec.k, spec.tube_radius(w))?;
    let mut clauses = Vec::with_capacity(4);

    clauses.push(clause(
        "no orphans",
        sd.orphans.first().map(|&j| {
            format!(
                "{} sample(s) of W' in K lie outside the tube of radius {}, first is {j}",
                sd.orphans.len(),
                sd.tube_radius
            )
        }),
    ));

    let uncovered = sd.base_in_k.iter().find(|&&i| sd.sheet_count[i] == 0);
    clauses.push(clause(
        "coverage",
        uncovered.map(|i| format!("sample {i} of W in K has no preimage")),
    ));

    match kind {
        NeighborhoodKind::Gs | NeighborhoodKind::Ss => {
            let bad = sd.base_in_k.iter().find(|&&i| sd.sheet_count[i] > 1);
            clauses.push(clause(
                "single sheet",
                bad.map(|&i| format!("sheet count {} at sample {i}", sd.sheet_count[i])),
            ));
        }
        NeighborhoodKind::Ls | NeighborhoodKind::Ms => {
            clauses.push(clause(
                "covering map",
                (!sd.local_diffeo_ok).then(|| "sheet count varies within a component of W in K".to_string()),
            ));
        }
    }

    let mut worst: Option<(usize, f64)> = None;
    for p in &sd.pairs {
        if !spec.k.contains(w_prime.samples()[p.source].position()) {
            continue;
        }
        let size = p.norm + p.slope;
        if !(size < spec.eps) && worst.is_none_or(|(_, s)| size > s) {
            worst = Some((p.source, size));
        }
    }
    clauses.push(clause(
        "C1 bound",
        worst.map(|(j, s)| format!("|f| + |Df| = {s} >= {} at sample {j} of W'", spec.eps)),
    ));
    Ok((clauses, sd))
}

/// W′ ∈ (K, ε)^gs(W): W′ ∩ K is the image of a single normal section of W with
/// ‖f‖ + ‖τ∘Df‖ < ε.
pub fn in_gs_neighborhood(
    w: &DiscretizedSubmanifold,
    w_prime: &DiscretizedSubmanifold,
    spec: &NeighborhoodSpec,
) -> Result<MembershipReport> {
    let (clauses, decomposition) = base_clauses(w, w_prime, spec, NeighborhoodKind::Gs)?;
    Ok(MembershipReport {
        kind: NeighborhoodKind::Gs,
        clauses,
        decomposition,
    })
}

/// W′ ∈ (K, ε)^ls(W): as gs, but the projection need only be a covering map.
pub fn in_ls_neighborhood(
    w: &DiscretizedSubmanifold,
    w_prime: &DiscretizedSubmanifold,
    spec: &NeighborhoodSpec,
) -> Result<MembershipReport> {
    let (clauses, decomposition) = base_clauses(w, w_prime, spec, NeighborhoodKind::Ls)?;
    Ok(MembershipReport {
        kind: NeighborhoodKind::Ls,
        clauses,
        decomposition,
    })
}

fn label_tolerance(spec: &NeighborhoodSpec) -> Result<f64> {
    spec.label_eps
        .ok_or_else(|| Error::InvalidParameter("a label tolerance is required".into()))
}

/// ls membership of the bases, and labels in (ℝ₊, +) summing correctly over sheets:
/// |α(x) − Σ_{y ↦ x} α′(y)| < label_eps on W ∩ K.
pub fn in_ms_neighborhood(
    w: &LabeledSubmanifold,
    w_prime: &LabeledSubmanifold,
    spec: &NeighborhoodSpec,
) -> Result<MembershipReport> {
    let tol = label_tolerance(spec)?;
    let (mut clauses, sd) = base_clauses(w.base(), w_prime.base(), spec, NeighborhoodKind::Ms)?;
    let mut sums = vec![0.0; w.base().len()];
    for p in &sd.pairs {
        sums[p.target] += w_prime.labels()[p.source];
    }
    let bad = sd
        .base_in_k
        .iter()
        .map(|&i| (i, (w.labels()[i] - sums[i]).abs()))
        .find(|&(_, dev)| !(dev < tol));
    clauses.push(clause(
        "label sum",
        bad.map(|(i, dev)| format!("label deviation {dev} >= {tol} at sample {i}")),
    ));
    Ok(MembershipReport {
        kind: NeighborhoodKind::Ms,
        clauses,
        decomposition: sd,
    })
}

/// gs membership of the bases, and labels within the sup-distance ball of radius
/// label_eps: |α′(y) − α(x)| < label_eps for every pair with y ∈ K.
pub fn in_ss_neighborhood(
    w: &LabeledSubmanifold,
    w_prime: &LabeledSubmanifold,
    spec: &NeighborhoodSpec,
) -> Result<MembershipReport> {
    let tol = label_tolerance(spec)?;
    let (mut clauses, sd) = base_clauses(w.base(), w_prime.base(), spec, NeighborhoodKind::Ss)?;
    let bad = sd
        .pairs
        .iter()
        .filter(|p| spec.k.contains(w_prime.base().samples()[p.source].position()))
        .map(|p| (p.source, (w_prime.labels()[p.source] - w.labels()[p.target]).abs()))
        .find(|&(_, dev)| !(dev < tol));
    clauses.push(clause(
        "label ball",
        bad.map(|(j, dev)| format!("label deviation {dev} >= {tol} at sample {j} of W'")),
    ));
    Ok(MembershipReport {
        kind: NeighborhoodKind::Ss,
        clauses,
        decomposition: sd,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::manifolds::{generate, parallel_copies, perturb_normal, BumpMode, GeneratorSpec};
    use nalgebra::DMatrix;

    fn x_axis() -> DiscretizedSubmanifold {
        generate(&GeneratorSpec::line(2.0, 401)).unwrap()
    }

    fn tilt(w: &DiscretizedSubmanifold, m: f64) -> DiscretizedSubmanifold {
        w.linear_image(&DMatrix::from_row_slice(2, 2, &[1.0, 0.0, m, 1.0]))
            .unwrap()
    }

    fn square() -> CompactRegion {
        CompactRegion::cube(2, 1.0).unwrap()
    }

    #[test]
    fn shifted_circle_is_a_gs_neighbour() {
        let c = generate(&GeneratorSpec::circle(1.0, 512)).unwrap();
        let shifted = perturb_normal(&c, 0.1, &BumpMode::ConstantShift).unwrap();
        let spec = NeighborhoodSpec::new(CompactRegion::ball(vec![0.0, 0.0], 2.0).unwrap(), 0.5).unwrap();
        let rep = in_gs_neighborhood(&c, &shifted, &spec).unwrap();
        assert!(rep.is_member(), "{rep}");
    }

    #[test]
    fn two_copies_fail_single_sheet() {
        let c = generate(&GeneratorSpec::circle(1.0, 512)).unwrap();
        let two = parallel_copies(&c, 0.1).unwrap();
        let spec = NeighborhoodSpec::new(CompactRegion::ball(vec![0.0, 0.0], 2.0).unwrap(), 0.5).unwrap();
        let gs = in_gs_neighborhood(&c, &two, &spec).unwrap();
        assert!(!gs.is_member());
        assert!(gs.clause("single sheet").unwrap().failure.is_some());
        assert!(gs.to_string().contains("single sheet: FAIL"));
        assert!(in_ls_neighborhood(&c, &two, &spec).unwrap().is_member());
    }

    #[test]
    fn tilt_threshold() {
        let w = x_axis();
        let m = 0.1;
        let tilted = tilt(&w, m);
        let member = |eps: f64| {
            in_gs_neighborhood(&w, &tilted, &NeighborhoodSpec::new(square(), eps).unwrap())
                .unwrap()
                .is_member()
        };
        assert!(member(2.0 * m + 1e-6));
        assert!(!member(m));
        assert!(!member(2.0 * m - 1e-6));
    }

    #[test]
    fn orthogonal_line_is_not_an_ls_neighbour() {
        let w = x_axis();
        let rot = DMatrix::from_row_slice(2, 2, &[0.0, -1.0, 1.0, 0.0]);
        let y_axis = w.rotated(&rot).unwrap();
        let spec = NeighborhoodSpec::new(CompactRegion::ball(vec![0.0, 0.0], 1.0).unwrap(), 0.1).unwrap();
        let rep = in_ls_neighborhood(&w, &y_axis, &spec).unwrap();
        assert!(!rep.is_member());
        assert!(rep.clause("no orphans").unwrap().failure.is_some());
        assert!(rep.clause("C1 bound").unwrap().failure.is_some());
    }

    #[test]
    fn labelled_neighbourhoods() {
        let c = generate(&GeneratorSpec::circle(1.0, 256)).unwrap();
        let alpha: Vec<f64> = (0..256).map(|i| 1.0 + (i as f64 * 0.1).sin().abs()).collect();
        let lw = LabeledSubmanifold::new(c.clone(), alpha.clone()).unwrap();
        let spec = NeighborhoodSpec::new(CompactRegion::ball(vec![0.0, 0.0], 2.0).unwrap(), 0.5)
            .unwrap()
            .with_label_eps(0.1)
            .unwrap();
        assert!(in_ms_neighborhood(&lw, &lw, &spec).unwrap().is_member());
        assert!(in_ss_neighborhood(&lw, &lw, &spec).unwrap().is_member());

        let two = parallel_copies(&c, 0.05).unwrap();
        let halves: Vec<f64> = alpha.iter().chain(&alpha).map(|a| a / 2.0).collect();
        let lhalf = LabeledSubmanifold::new(two.clone(), halves).unwrap();
        assert!(in_ms_neighborhood(&lw, &lhalf, &spec).unwrap().is_member());
        let full: Vec<f64> = alpha.iter().chain(&alpha).copied().collect();
        let lfull = LabeledSubmanifold::new(two, full).unwrap();
        let rep = in_ms_neighborhood(&lw, &lfull, &spec).unwrap();
        assert!(rep.clause("label sum").unwrap().failure.is_some());

        let shifted = perturb_normal(&c, 0.01, &BumpMode::ConstantShift).unwrap();
        let near: Vec<f64> = alpha.iter().map(|a| a + 0.05).collect();
        let far: Vec<f64> = alpha.iter().map(|a| a + 0.2).collect();
        let ok = LabeledSubmanifold::new(shifted.clone(), near).unwrap();
        let bad = LabeledSubmanifold::new(shifted, far).unwrap();
        assert!(in_ss_neighborhood(&lw, &ok, &spec).unwrap().is_member());
        assert!(!in_ss_neighborhood(&lw, &bad, &spec).unwrap().is_member());
    }

    #[test]
    fn reflexive_for_any_region() {
        let c = generate(&GeneratorSpec::circle(1.0, 64)).unwrap();
        for k in [square(), CompactRegion::ball(vec![1.0, 0.0], 0.3).unwrap()] {
            let spec = NeighborhoodSpec::new(k, 1e-3).unwrap();
            assert!(in_gs_neighborhood(&c, &c, &spec).unwrap().is_member());
        }
    }
}
