use super::{CellError, Scheme};
use crate::coeff::PeriodizedField;
use crate::fem::{assemble, cell_average, AssembledForms, BoundaryKind, DofMap, Grid, MeshSpec};
use crate::linalg::{cg_solve, CgOptions};

/// Discrete corrector for one unit direction.
#[derive(Debug, Clone)]
pub struct Corrector {
    /// Zero-based axis `l` of the direction `e_l`.
    pub direction: usize,
    pub bc: BoundaryKind,
    pub tinv: f64,
    pub grid: Grid,
    pub dofmap: DofMap,
    pub w: Vec<f64>,
    pub iterations: usize,
    pub residual: f64,
}

impl Corrector {
    /// `(1/|Y|) ∫ w`.
    pub fn average(&self) -> f64 {
        cell_average(&self.grid, &self.dofmap, &self.w).expect("corrector sized to its dof map")
    }
}

/// One assembled cell problem with the correctors of every direction.
#[derive(Debug, Clone)]
pub struct CellSolution {
    pub field: PeriodizedField,
    pub mesh: MeshSpec,
    pub grid: Grid,
    pub dofmap: DofMap,
    pub forms: AssembledForms,
    pub correctors: Vec<Corrector>,
}

impl CellSolution {
    pub fn scheme(&self) -> Scheme {
        Scheme::from_parts(self.dofmap.kind(), self.forms.tinv)
    }

    pub fn tinv(&self) -> f64 {
        self.forms.tinv
    }

    /// The corrector of `ξ = Σ ξ_l e_l`, by linearity.
    pub fn combined(&self, xi: [f64; 2]) -> Vec<f64> {
        let mut w = vec![0.0; self.dofmap.dof_count()];
        for c in &self.correctors {
            let s = xi[c.direction];
            if s != 0.0 {
                for (o, v) in w.iter_mut().zip(&c.w) {
                    *o += s * v;
                }
            }
        }
        w
    }
}

fn setup(
    field: &PeriodizedField,
    mesh: &MeshSpec,
    bc: BoundaryKind,
    tinv: f64,
) -> Result<(Grid, DofMap, AssembledForms), CellError> {
    if bc == BoundaryKind::Free {
        return Err(CellError::Invalid("cell problems need periodic or dirichlet unknowns".into()));
    }
    if !(tinv >= 0.0 && tinv.is_finite()) {
        return Err(CellError::Invalid(format!("Tinv must be nonnegative, got {tinv}")));
    }
    let grid = mesh.grid(field.dim(), field.cell_side(), field.origin())?;
    let dofmap = DofMap::new(&grid, bc);
    let forms = assemble(&grid, &dofmap, field, tinv)?;
    Ok((grid, dofmap, forms))
}

fn solve_direction(
    grid: &Grid,
    dofmap: &DofMap,
    forms: &AssembledForms,
    op: &crate::linalg::SparseSym<f64>,
    l: usize,
) -> Result<Corrector, CellError> {
    let project = dofmap.kind() == BoundaryKind::Periodic && forms.tinv == 0.0;
    let opts = CgOptions::for_problem(dofmap.dof_count(), grid.dim(), project);
    let (w, report) = cg_solve(op, &forms.loads[l], &opts, None)?;
    Ok(Corrector {
        direction: l,
        bc: dofmap.kind(),
        tinv: forms.tinv,
        grid: grid.clone(),
        dofmap: dofmap.clone(),
        w,
        iterations: report.iterations,
        residual: report.relative_residual,
    })
}

/// Solves `(K + Tinv·M) w = F[l]` for the direction `e_l` (zero-based `l`).
///
/// The periodic unregularized problem is singular; its solution is returned
/// with zero mean.
pub fn solve_corrector(
    field: &PeriodizedField,
    mesh: &MeshSpec,
    l: usize,
    bc: BoundaryKind,
    tinv: f64,
) -> Result<Corrector, CellError> {
    if l >= field.dim() {
        return Err(CellError::Invalid(format!("direction {} outside dimension {}", l + 1, field.dim())));
    }
    let (grid, dofmap, forms) = setup(field, mesh, bc, tinv)?;
    let op = forms.operator();
    solve_direction(&grid, &dofmap, &forms, &op, l)
}

/// Assembles once and solves for every direction.
pub fn solve_cell(
    field: &PeriodizedField,
    mesh: &MeshSpec,
    bc: BoundaryKind,
    tinv: f64,
) -> Result<CellSolution, CellError> {
    let (grid, dofmap, forms) = setup(field, mesh, bc, tinv)?;
    let op = forms.operator();
    let correctors = (0..field.dim())
        .map(|l| solve_direction(&grid, &dofmap, &forms, &op, l))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(CellSolution {
        field: field.clone(),
        mesh: *mesh,
        grid,
        dofmap,
        forms,
        correctors,
    })
}

