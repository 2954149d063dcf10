#ifndef CLAIR_PROBLEMS_HPP
#define CLAIR_PROBLEMS_HPP

#include "clair/sparse.hpp"

#include <array>
#include <string>
#include <vector>

namespace clair {

enum class ProblemKind {
    Identity,
    Poisson2D,
    Poisson3D,
    AnisoDiffusion2D,
    JumpBoxInBox,
    JumpSawtooth,
    AdvDiffConstant,
    AdvDiffRecirculating,
};

std::string to_string(ProblemKind kind);
ProblemKind problem_kind_from_string(const std::string& name);

using Point2 = std::array<double, 2>;

/// Default shaded region of the sawtooth jump problem on [0,16]^2.
const std::vector<Point2>& default_sawtooth_polygon();

struct ProblemSpec {
    ProblemKind kind = ProblemKind::Poisson2D;
    int nx = 32;
    int ny = 32;
    int nz = 32;
    double epsilon = 1.0;
    double phi = 0.0;
    double alpha = 1.0;
    double d_high = 1e4;
    /// Scale diffusion stencils by 1/h^2.
    bool scale_h = true;
    /// Sawtooth region; empty means default_sawtooth_polygon().
    std::vector<Point2> polygon;

    void validate() const;
    int size() const;
};

/// Interior unknowns only, x index fastest; h = 1/(nx+1) on the unit square.
SparseMatrixd poisson_2d(int nx, int ny, bool scale_h = true);
SparseMatrixd poisson_3d(int nx, int ny, int nz, bool scale_h = true);

/// Q1 stiffness matrix of -div(Q^T D Q grad u) on [0,1]^2, D = diag(1, eps),
/// Q the rotation by phi.
SparseMatrixd aniso_q1_2d(int nx, int ny, double epsilon, double phi);

/// 4x4 Q1 element stiffness for the diffusion tensor of aniso_q1_2d; local
/// node order (0,0), (1,0), (1,1), (0,1).
Eigen::Matrix4d q1_element_matrix(double epsilon, double phi);

/// 5-point conservative differences with face coefficients equal to the
/// arithmetic mean of the nodal coefficients.
SparseMatrixd jump_coefficient_2d(const ProblemSpec& spec);

/// -alpha Laplacian + b . grad u on [-1,1]^2 with first-order upwinding.
SparseMatrixd advdiff_upwind_2d(const ProblemSpec& spec);

Point2 constant_wind();
Point2 recirculating_wind(double x, double y);

bool point_in_polygon(const Point2& p, const std::vector<Point2>& polygon);

/// Bdiag^{-1} A where Bdiag holds the diagonal blocks of size block_size.
SparseMatrixd block_diag_prescale(const SparseMatrixd& A, int block_size);

SparseMatrixd generate(const ProblemSpec& spec);

/// Grid spacing of the generated problem.
double grid_spacing(const ProblemSpec& spec);

} // namespace clair

#endif
