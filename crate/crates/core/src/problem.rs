//! One driven point: Hamiltonian with sensor, dressed eigensystem, jumps,
//! Liouvillian and its Floquet steady state.

use crate::dissipation::{build_liouvillian, dressed_jump, standard_channels, Channel, LiouvillianParts, WeightRule};
use crate::error::Result;
use crate::floquet::{steady_state, FloquetOptions, FloquetSolution};
use crate::model::{build_hamiltonian, diagonalize, drive_operator, sensor_sigma_x, EigenSystem, Layout, ModelParams};
use crate::operators::Operator;

#[derive(Clone, Debug)]
pub struct DrivenProblem {
    pub params: ModelParams,
    pub layout: Layout,
    /// Retained dressed states (after the working-subspace cut).
    pub eig: EigenSystem,
    pub parts: LiouvillianParts,
}

impl DrivenProblem {
    /// Builds the problem with the truncation from `p.resolve_n_fock()`.
    pub fn build(p: &ModelParams) -> Result<Self> {
        let n_fock = p.resolve_n_fock()?;
        Self::with_fock(p, n_fock)
    }

    pub fn with_fock(p: &ModelParams, n_fock: usize) -> Result<Self> {
        let layout = Layout::new(n_fock, true);
        let h = build_hamiltonian(p, layout)?;
        let full = diagonalize(&h, None)?;
        let eig = match p.working_cutoff() {
            Some(cut) => full.below(cut),
            None => full,
        };
        let jumps = standard_channels(p, &eig, layout)?;
        let parts = build_liouvillian(p, &eig, &drive_operator(p, layout), &jumps)?;
        Ok(Self {
            params: p.clone(),
            layout,
            eig,
            parts,
        })
    }

    pub fn solve(&self) -> Result<FloquetSolution> {
        steady_state(&self.parts, FloquetOptions::with_depth(self.params.n_floquet))
    }

    /// Dressed sensor lowering operator `Σₛ⁺` in the retained eigenbasis.
    pub fn sensor_lowering(&self) -> Result<Operator> {
        let jump = dressed_jump(
            &self.eig,
            &sensor_sigma_x(self.layout),
            WeightRule::FreqRatio(self.params.omega_s),
            Channel::Sensor,
            self.params.sensor_decay,
        )?;
        Ok(jump.matrix)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_point_has_compact_working_space() {
        let problem = DrivenProblem::build(&ModelParams::default()).unwrap();
        let m = problem.eig.len();
        assert!((10..=24).contains(&m), "{m} retained states");
        assert_eq!(problem.parts.dim(), m);
        let e = problem.eig.shifted_energies();
        assert!(e.iter().all(|x| *x <= 2.0 * 1.1 + 1.5 + 1e-12));
    }

    #[test]
    fn full_space_is_kept_without_margin() {
        let p = ModelParams {
            subspace_margin: None,
            n_fock: Some(6),
            ..ModelParams::default()
        };
        let problem = DrivenProblem::build(&p).unwrap();
        assert_eq!(problem.eig.len(), 6 * 2 * 2);
    }
}
