//! End-to-end runs on one discretization: assembly, projectors, plain and
//! stabilized solves, far fields and condition numbers.

use faer::{c64, Mat};

use crate::analysis;
use crate::basis::BasisSpace;
use crate::consts::wavenumber;
use crate::error::Result;
use crate::linalg::{self, IterativeSolution};
use crate::mesh::SurfaceMesh;
use crate::operators::{self, EfieBlocks, PlaneWave};
use crate::precond::{self, PowerSettings, Projector, SolverKind, SolverSettings};
use crate::projectors::{ProjectorPair, StarVariant};
use crate::quadrature::QuadratureConfig;

/// A mesh with its order-`p` basis, projector pair and dense `P_sigma`.
pub struct Problem {
    pub mesh: SurfaceMesh,
    pub basis: BasisSpace,
    pub cfg: QuadratureConfig,
    pub projector: ProjectorPair,
    psigma: Mat<f64>,
}

/// A solved current. Stabilized solves keep the split so the far field
/// can be radiated without low-frequency cancellation.
#[derive(Clone, Debug)]
pub struct Solved {
    pub current: Vec<c64>,
    pub split: Option<(Vec<c64>, Vec<c64>)>,
    pub iterations: usize,
    pub residual: f64,
    pub converged: bool,
}

impl Problem {
    pub fn new(
        mesh: SurfaceMesh,
        order: usize,
        cfg: QuadratureConfig,
        cg_tol: f64,
    ) -> Result<Self> {
        let basis = BasisSpace::new(&mesh, order)?;
        let projector = ProjectorPair::build(&mesh, &basis, StarVariant::LagrangeTested)?
            .with_tolerance(cg_tol);
        let psigma = projector.dense_psigma()?;
        Ok(Self {
            mesh,
            basis,
            cfg,
            projector,
            psigma,
        })
    }

    pub fn len(&self) -> usize {
        self.basis.len()
    }

    pub fn is_empty(&self) -> bool {
        self.basis.is_empty()
    }

    pub fn psigma(&self) -> &Mat<f64> {
        &self.psigma
    }

    pub fn blocks(&self, freq_hz: f64) -> Result<EfieBlocks> {
        operators::assemble_blocks(&self.mesh, &self.basis, wavenumber(freq_hz), &self.cfg)
    }

    pub fn scaling_constant(&self, blocks: &EfieBlocks) -> Result<f64> {
        precond::estimate_c(
            blocks,
            Projector::Dense(&self.psigma),
            PowerSettings::default(),
        )
    }

    pub fn stabilized_matrix(&self, blocks: &EfieBlocks, c: f64) -> Mat<c64> {
        precond::assemble_stabilized(blocks, &self.psigma, c, blocks.k)
    }

    /// `T j = e`, by LU or by GMRES (whose last iterate is kept even when
    /// it misses the tolerance).
    pub fn solve_plain(
        &self,
        blocks: &EfieBlocks,
        wave: &PlaneWave,
        settings: &SolverSettings,
    ) -> Result<Solved> {
        let ex = operators::assemble_excitation(&self.mesh, &self.basis, wave, &self.cfg);
        let s = solve(&blocks.system(), &ex.e, settings)?;
        Ok(Solved {
            converged: converged(&s, settings),
            current: s.x,
            split: None,
            iterations: s.iterations,
            residual: s.residual,
        })
    }

    pub fn solve_stabilized(
        &self,
        blocks: &EfieBlocks,
        c: f64,
        wave: &PlaneWave,
        settings: &SolverSettings,
    ) -> Result<Solved> {
        let ex = operators::assemble_excitation(&self.mesh, &self.basis, wave, &self.cfg);
        let sys = precond::StabilizedSystem::new(blocks, &self.psigma, &ex, c)?;
        let s = solve(&sys.matrix, &sys.rhs, settings)?;
        let (j_sol, j_nsol) =
            precond::recover_currents(Projector::Dense(&self.psigma), &s.x, c, blocks.k)?;
        Ok(Solved {
            converged: converged(&s, settings),
            current: j_sol.iter().zip(&j_nsol).map(|(a, b)| a + b).collect(),
            split: Some((j_sol, j_nsol)),
            iterations: s.iterations,
            residual: s.residual,
        })
    }

    /// Bistatic RCS in dBsm along the cut `phi_deg`.
    pub fn rcs_dbsm(
        &self,
        solved: &Solved,
        k: f64,
        amplitude: f64,
        theta_deg: &[f64],
        phi_deg: f64,
    ) -> Vec<f64> {
        let dirs = operators::cut_directions(theta_deg, phi_deg);
        let ff = match &solved.split {
            Some((js, jn)) => {
                operators::far_field_split(&self.mesh, &self.basis, js, jn, k, &dirs, &self.cfg)
            }
            None => operators::far_field(
                &self.mesh,
                &self.basis,
                &solved.current,
                k,
                &dirs,
                &self.cfg,
            ),
        };
        operators::rcs(&ff, amplitude)
            .into_iter()
            .map(operators::to_dbsm)
            .collect()
    }

    /// Condition number of the plain system `T`: the SVD of `T` unless
    /// that exceeds `1e12`, where the structured factorization takes over.
    pub fn plain_condition(&self, blocks: &EfieBlocks, c: f64) -> Result<f64> {
        let direct = analysis::condition_number(&blocks.system())?;
        if direct > STRUCTURED_ABOVE {
            analysis::plain_condition_structured(blocks, &self.psigma, c)
        } else {
            Ok(direct)
        }
    }

    pub fn stabilized_condition(&self, blocks: &EfieBlocks, c: f64) -> Result<f64> {
        analysis::condition_number(&self.stabilized_matrix(blocks, c))
    }
}

/// Plain condition numbers beyond this use the structured estimate.
pub const STRUCTURED_ABOVE: f64 = 1e12;

fn converged(s: &IterativeSolution, settings: &SolverSettings) -> bool {
    match settings.kind {
        SolverKind::Lu => s.residual.is_finite(),
        SolverKind::Gmres => s.residual <= settings.gmres_tol,
    }
}

/// Like [`precond::solve_dense`], but an unconverged GMRES run returns its
/// last iterate with the true residual instead of an error.
pub fn solve(a: &Mat<c64>, b: &[c64], settings: &SolverSettings) -> Result<IterativeSolution> {
    match settings.kind {
        SolverKind::Lu => precond::solve_dense(a, b, settings),
        SolverKind::Gmres => {
            let s = linalg::gmres_best_effort(
                |v| linalg::matvec(a, v),
                b,
                settings.gmres_restart,
                settings.gmres_tol,
                settings.gmres_max_iter,
            );
            let bn = linalg::norm(b);
            let r = linalg::norm(&linalg::sub(b, &linalg::matvec(a, &s.x)));
            Ok(IterativeSolution {
                residual: if bn == 0.0 { r } else { r / bn },
                ..s
            })
        }
    }
}
