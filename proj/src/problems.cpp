#include "clair/problems.hpp"

#include <Eigen/LU>

#include <cmath>
#include <stdexcept>

namespace clair {

namespace {

struct KindName {
    ProblemKind kind;
    const char* name;
};

constexpr KindName kKindNames[] = {
    {ProblemKind::Identity, "identity"},
    {ProblemKind::Poisson2D, "poisson2d"},
    {ProblemKind::Poisson3D, "poisson3d"},
    {ProblemKind::AnisoDiffusion2D, "aniso2d"},
    {ProblemKind::JumpBoxInBox, "jump-box"},
    {ProblemKind::JumpSawtooth, "jump-sawtooth"},
    {ProblemKind::AdvDiffConstant, "advdiff-constant"},
    {ProblemKind::AdvDiffRecirculating, "advdiff-recirculating"},
};

int idx2(int i, int j, int nx) { return i + nx * j; }

void require_grid(int n, const char* what) {
    if (n < 2) throw std::invalid_argument(std::string(what) + ": grid dimension must be >= 2");
}

} // namespace

std::string to_string(ProblemKind kind) {
    for (const auto& kn : kKindNames)
        if (kn.kind == kind) return kn.name;
    throw std::invalid_argument("unknown problem kind");
}

ProblemKind problem_kind_from_string(const std::string& name) {
    for (const auto& kn : kKindNames)
        if (name == kn.name) return kn.kind;
    throw std::invalid_argument("unknown problem kind '" + name + "'");
}

const std::vector<Point2>& default_sawtooth_polygon() {
    static const std::vector<Point2> poly = {
        {2, 6},  {4, 9},  {6, 6},  {8, 9},  {10, 6}, {12, 9}, {14, 6},
        {14, 8}, {12, 11}, {10, 8}, {8, 11}, {6, 8},  {4, 11}, {2, 8},
    };
    return poly;
}

void ProblemSpec::validate() const {
    if (kind == ProblemKind::Identity) {
        if (nx < 1) throw std::invalid_argument("ProblemSpec: identity size must be >= 1");
        return;
    }
    require_grid(nx, "ProblemSpec");
    require_grid(ny, "ProblemSpec");
    if (kind == ProblemKind::Poisson3D) require_grid(nz, "ProblemSpec");
    if (kind == ProblemKind::AnisoDiffusion2D && !(epsilon > 0.0))
        throw std::invalid_argument("ProblemSpec: anisotropy epsilon must be > 0");
    if ((kind == ProblemKind::AdvDiffConstant || kind == ProblemKind::AdvDiffRecirculating) && !(alpha >= 0.0))
        throw std::invalid_argument("ProblemSpec: alpha must be >= 0");
    if (kind == ProblemKind::AdvDiffRecirculating && alpha == 0.0)
        throw std::invalid_argument("ProblemSpec: recirculating advection requires alpha > 0");
    if ((kind == ProblemKind::JumpBoxInBox || kind == ProblemKind::JumpSawtooth) && !(d_high > 0.0))
        throw std::invalid_argument("ProblemSpec: jump coefficient must be > 0");
}

int ProblemSpec::size() const {
    switch (kind) {
    case ProblemKind::Identity: return nx;
    case ProblemKind::Poisson3D: return nx * ny * nz;
    default: return nx * ny;
    }
}

SparseMatrixd poisson_2d(int nx, int ny, bool scale_h) {
    require_grid(nx, "poisson_2d");
    require_grid(ny, "poisson_2d");
    const double h = 1.0 / (nx + 1);
    const double s = scale_h ? 1.0 / (h * h) : 1.0;
    std::vector<Triplet<double>> trip;
    trip.reserve(static_cast<std::size_t>(5 * nx * ny));
    for (int j = 0; j < ny; ++j)
        for (int i = 0; i < nx; ++i) {
            const int r = idx2(i, j, nx);
            trip.emplace_back(r, r, 4.0 * s);
            if (i > 0) trip.emplace_back(r, idx2(i - 1, j, nx), -s);
            if (i + 1 < nx) trip.emplace_back(r, idx2(i + 1, j, nx), -s);
            if (j > 0) trip.emplace_back(r, idx2(i, j - 1, nx), -s);
            if (j + 1 < ny) trip.emplace_back(r, idx2(i, j + 1, nx), -s);
        }
    return from_triplets<double>(nx * ny, nx * ny, trip);
}

SparseMatrixd poisson_3d(int nx, int ny, int nz, bool scale_h) {
    require_grid(nx, "poisson_3d");
    require_grid(ny, "poisson_3d");
    require_grid(nz, "poisson_3d");
    const double h = 1.0 / (nx + 1);
    const double s = scale_h ? 1.0 / (h * h) : 1.0;
    auto id = [&](int i, int j, int k) { return i + nx * (j + ny * k); };
    std::vector<Triplet<double>> trip;
    for (int k = 0; k < nz; ++k)
        for (int j = 0; j < ny; ++j)
            for (int i = 0; i < nx; ++i) {
                const int r = id(i, j, k);
                trip.emplace_back(r, r, 6.0 * s);
                if (i > 0) trip.emplace_back(r, id(i - 1, j, k), -s);
                if (i + 1 < nx) trip.emplace_back(r, id(i + 1, j, k), -s);
                if (j > 0) trip.emplace_back(r, id(i, j - 1, k), -s);
                if (j + 1 < ny) trip.emplace_back(r, id(i, j + 1, k), -s);
                if (k > 0) trip.emplace_back(r, id(i, j, k - 1), -s);
                if (k + 1 < nz) trip.emplace_back(r, id(i, j, k + 1), -s);
            }
    const int n = nx * ny * nz;
    return from_triplets<double>(n, n, trip);
}

Eigen::Matrix4d q1_element_matrix(double epsilon, double phi) {
    const double c = std::cos(phi);
    const double s = std::sin(phi);
    Eigen::Matrix2d K;
    K << c * c + epsilon * s * s, (epsilon - 1.0) * c * s, (epsilon - 1.0) * c * s, s * s + epsilon * c * c;
    // reference square [0,1]^2; the stiffness of a square element is h-independent in 2D
    const double xi[2] = {0.5 - 0.5 / std::sqrt(3.0), 0.5 + 0.5 / std::sqrt(3.0)};
    const double corner[4][2] = {{0, 0}, {1, 0}, {1, 1}, {0, 1}};
    Eigen::Matrix4d E = Eigen::Matrix4d::Zero();
    for (double qx : xi)
        for (double qy : xi) {
            Eigen::Matrix<double, 2, 4> G;
            for (int a = 0; a < 4; ++a) {
                const double sx = corner[a][0] == 1 ? 1.0 : -1.0;
                const double sy = corner[a][1] == 1 ? 1.0 : -1.0;
                const double fx = corner[a][0] == 1 ? qx : 1.0 - qx;
                const double fy = corner[a][1] == 1 ? qy : 1.0 - qy;
                G(0, a) = sx * fy;
                G(1, a) = fx * sy;
            }
            E += 0.25 * G.transpose() * K * G;
        }
    return E;
}

SparseMatrixd aniso_q1_2d(int nx, int ny, double epsilon, double phi) {
    require_grid(nx, "aniso_q1_2d");
    require_grid(ny, "aniso_q1_2d");
    if (!(epsilon > 0.0)) throw std::invalid_argument("aniso_q1_2d: epsilon must be > 0");
    const Eigen::Matrix4d E = q1_element_matrix(epsilon, phi);
    const int offs[4][2] = {{0, 0}, {1, 0}, {1, 1}, {0, 1}};
    std::vector<Triplet<double>> trip;
    // elements indexed by their lower-left node on the (nx+2) x (ny+2) node grid
    for (int ej = 0; ej <= ny; ++ej)
        for (int ei = 0; ei <= nx; ++ei) {
            int dof[4];
            for (int a = 0; a < 4; ++a) {
                const int i = ei + offs[a][0] - 1;
                const int j = ej + offs[a][1] - 1;
                dof[a] = (i >= 0 && i < nx && j >= 0 && j < ny) ? idx2(i, j, nx) : -1;
            }
            for (int a = 0; a < 4; ++a) {
                if (dof[a] < 0) continue;
                for (int b = 0; b < 4; ++b)
                    if (dof[b] >= 0) trip.emplace_back(dof[a], dof[b], E(a, b));
            }
        }
    return from_triplets<double>(nx * ny, nx * ny, trip);
}

bool point_in_polygon(const Point2& p, const std::vector<Point2>& polygon) {
    bool inside = false;
    const std::size_t n = polygon.size();
    for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
        const Point2& a = polygon[i];
        const Point2& b = polygon[j];
        if ((a[1] > p[1]) != (b[1] > p[1])) {
            const double x = a[0] + (p[1] - a[1]) * (b[0] - a[0]) / (b[1] - a[1]);
            if (p[0] < x) inside = !inside;
        }
    }
    return inside;
}

SparseMatrixd jump_coefficient_2d(const ProblemSpec& spec) {
    spec.validate();
    const int nx = spec.nx;
    const int ny = spec.ny;
    const bool saw = spec.kind == ProblemKind::JumpSawtooth;
    const double L = saw ? 16.0 : 1.0;
    const double h = L / (nx + 1);
    const double hy = L / (ny + 1);
    const std::vector<Point2>& poly = spec.polygon.empty() ? default_sawtooth_polygon() : spec.polygon;
    auto coef = [&](int i, int j) {
        // node (i, j) on the full grid including the boundary ring
        const double x = i * h;
        const double y = j * hy;
        bool high = false;
        if (spec.kind == ProblemKind::JumpBoxInBox) high = x >= 0.44 && x <= 0.52 && y >= 0.44 && y <= 0.52;
        else if (saw) high = point_in_polygon({x, y}, poly);
        return high ? spec.d_high : 1.0;
    };
    const double sx = spec.scale_h ? 1.0 / (h * h) : 1.0;
    const double sy = spec.scale_h ? 1.0 / (hy * hy) : 1.0;
    std::vector<Triplet<double>> trip;
    for (int j = 0; j < ny; ++j)
        for (int i = 0; i < nx; ++i) {
            const int r = idx2(i, j, nx);
            const double dc = coef(i + 1, j + 1);
            const int di[4] = {-1, 1, 0, 0};
            const int dj[4] = {0, 0, -1, 1};
            double diag = 0.0;
            for (int f = 0; f < 4; ++f) {
                const int ii = i + di[f];
                const int jj = j + dj[f];
                const double w = 0.5 * (dc + coef(ii + 1, jj + 1)) * (f < 2 ? sx : sy);
                diag += w;
                if (ii >= 0 && ii < nx && jj >= 0 && jj < ny) trip.emplace_back(r, idx2(ii, jj, nx), -w);
            }
            trip.emplace_back(r, r, diag);
        }
    return from_triplets<double>(nx * ny, nx * ny, trip);
}

Point2 constant_wind() { return {std::sqrt(2.0 / 3.0), std::sqrt(1.0 / 3.0)}; }

Point2 recirculating_wind(double x, double y) {
    return {x * (1.0 - x) * (2.0 * y - 1.0), -(2.0 * x - 1.0) * (1.0 - y) * y};
}

SparseMatrixd advdiff_upwind_2d(const ProblemSpec& spec) {
    spec.validate();
    if (spec.kind != ProblemKind::AdvDiffConstant && spec.kind != ProblemKind::AdvDiffRecirculating)
        throw std::invalid_argument("advdiff_upwind_2d: not an advection-diffusion kind");
    const int nx = spec.nx;
    const int ny = spec.ny;
    const double h = 2.0 / (nx + 1);
    const double hy = 2.0 / (ny + 1);
    const double dx = spec.alpha / (h * h);
    const double dy = spec.alpha / (hy * hy);
    std::vector<Triplet<double>> trip;
    for (int j = 0; j < ny; ++j)
        for (int i = 0; i < nx; ++i) {
            const int r = idx2(i, j, nx);
            const double x = -1.0 + (i + 1) * h;
            const double y = -1.0 + (j + 1) * hy;
            const Point2 b = spec.kind == ProblemKind::AdvDiffConstant ? constant_wind() : recirculating_wind(x, y);
            const double bx = b[0] / h;
            const double by = b[1] / hy;
            double diag = 2.0 * dx + 2.0 * dy + std::abs(bx) + std::abs(by);
            auto add = [&](int ii, int jj, double v) {
                if (v != 0.0 && ii >= 0 && ii < nx && jj >= 0 && jj < ny) trip.emplace_back(r, idx2(ii, jj, nx), v);
            };
            add(i - 1, j, -dx - std::max(bx, 0.0));
            add(i + 1, j, -dx + std::min(bx, 0.0));
            add(i, j - 1, -dy - std::max(by, 0.0));
            add(i, j + 1, -dy + std::min(by, 0.0));
            trip.emplace_back(r, r, diag);
        }
    return from_triplets<double>(nx * ny, nx * ny, trip);
}

SparseMatrixd block_diag_prescale(const SparseMatrixd& A, int block_size) {
    if (block_size < 1) throw std::invalid_argument("block_diag_prescale: block size must be >= 1");
    if (A.rows() != A.cols() || A.rows() % block_size != 0)
        throw DimensionError("block_diag_prescale: size not divisible by block size");
    const int nb = static_cast<int>(A.rows()) / block_size;
    std::vector<Triplet<double>> trip;
    trip.reserve(static_cast<std::size_t>(A.nonZeros()) * static_cast<std::size_t>(block_size));
    std::vector<int> idx(static_cast<std::size_t>(block_size));
    for (int blk = 0; blk < nb; ++blk) {
        for (int t = 0; t < block_size; ++t) idx[static_cast<std::size_t>(t)] = blk * block_size + t;
        const DenseMatrixd D = extract_submatrix(A, idx, idx);
        Eigen::FullPivLU<DenseMatrixd> lu(D);
        if (!lu.isInvertible()) throw std::runtime_error("block_diag_prescale: singular diagonal block " + std::to_string(blk));
        const DenseMatrixd Dinv = lu.inverse();
        for (int t = 0; t < block_size; ++t) {
            const int row = idx[static_cast<std::size_t>(t)];
            for (SparseMatrixd::InnerIterator it(A, row); it; ++it)
                for (int s = 0; s < block_size; ++s) {
                    const double v = Dinv(s, t) * it.value();
                    if (v != 0.0) trip.emplace_back(idx[static_cast<std::size_t>(s)], static_cast<int>(it.col()), v);
                }
        }
    }
    SparseMatrixd out = from_triplets<double>(static_cast<int>(A.rows()), static_cast<int>(A.cols()), trip);
    // the diagonal blocks are identity by construction
    for (int i = 0; i < out.rows(); ++i)
        for (SparseMatrixd::InnerIterator it(out, i); it; ++it)
            if (it.col() / block_size == i / block_size) it.valueRef() = it.col() == i ? 1.0 : 0.0;
    canonicalize(out);
    return out;
}

double grid_spacing(const ProblemSpec& spec) {
    switch (spec.kind) {
    case ProblemKind::Identity: return 1.0;
    case ProblemKind::JumpSawtooth: return 16.0 / (spec.nx + 1);
    case ProblemKind::AdvDiffConstant:
    case ProblemKind::AdvDiffRecirculating: return 2.0 / (spec.nx + 1);
    default: return 1.0 / (spec.nx + 1);
    }
}

SparseMatrixd generate(const ProblemSpec& spec) {
    spec.validate();
    switch (spec.kind) {
    case ProblemKind::Identity: return identity<double>(spec.nx);
    case ProblemKind::Poisson2D: return poisson_2d(spec.nx, spec.ny, spec.scale_h);
    case ProblemKind::Poisson3D: return poisson_3d(spec.nx, spec.ny, spec.nz, spec.scale_h);
    case ProblemKind::AnisoDiffusion2D: return aniso_q1_2d(spec.nx, spec.ny, spec.epsilon, spec.phi);
    case ProblemKind::JumpBoxInBox:
    case ProblemKind::JumpSawtooth: return jump_coefficient_2d(spec);
    case ProblemKind::AdvDiffConstant:
    case ProblemKind::AdvDiffRecirculating: return advdiff_upwind_2d(spec);
    }
    throw std::invalid_argument("generate: unknown problem kind");
}

} // namespace clair
