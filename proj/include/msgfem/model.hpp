#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <string>

#include "msgfem/mesh.hpp"
#include "msgfem/sparse.hpp"

namespace msgfem {

/// Scalar coefficient field (A is scalar-isotropic: A(x) = a(x) * I).
/// Piecewise-constant kinds are sampled at quadrature points.
class CoefficientField {
 public:
  static CoefficientField constant(double value);
  /// Nearest-cell sampling of a grid covering rect; row 0 = bottom row.
  static CoefficientField raster(int cells_x, int cells_y, std::vector<double> values, Rect rect);
  /// Periodic inclusions of period eps inside the window (0.25,0.75)^2:
  /// value `inner` on the inclusions, `outer` elsewhere.
  static CoefficientField periodic_inclusions(double eps, double inner, double outer);

  double operator()(double x, double y) const;
  double min_value() const { return min_; }
  double max_value() const { return max_; }

 private:
  enum class Kind { constant, raster, inclusions };
  Kind kind_ = Kind::constant;
  double value_ = 1.0;                     // constant
  int gx_ = 0, gy_ = 0;                    // raster grid
  std::shared_ptr<std::vector<double>> grid_;
  Rect rect_;
  double eps_ = 1.0, inner_ = 1.0, outer_ = 1.0;  // inclusions
  double min_ = 1.0, max_ = 1.0;
};

/// V(x) = 1 / velocity(x) from a CSV grid: first line "nx ny", then ny rows
/// of nx positive floats, top row first. Throws MalformedFile,
/// NonpositiveVelocity.
CoefficientField ingest_raster_velocity(const std::string& path, const Rect& rect);

struct PointSource {
  double x = 0, y = 0;
  Complex amplitude{1.0, 0.0};
};

enum class BcType { impedance, dirichlet0 };

/// Boundary impedance coefficient beta: fixed data, or k*V(x) (geophysics
/// convention) resolved against the problem's V field.
struct BoundaryField {
  enum class Kind { constant, k_times_V };
  Kind kind = Kind::constant;
  double value = 1.0;

  double eval(double k, double v_at) const {
    return kind == Kind::constant ? value : k * v_at;
  }
};

struct ProblemSpec {
  double k = 1.0;
  CoefficientField A = CoefficientField::constant(1.0);
  CoefficientField V = CoefficientField::constant(1.0);
  BoundaryField beta;
  std::function<Complex(double, double)> f;                // volume source
  std::optional<PointSource> point_source;                 // nodal load at nearest node
  std::function<Complex(double, double, BoundaryTag)> g;   // impedance boundary data
  std::array<BcType, 4> bc = {BcType::impedance, BcType::impedance, BcType::impedance,
                              BcType::impedance};

  bool has_dirichlet() const {
    for (auto b : bc)
      if (b == BcType::dirichlet0) return true;
    return false;
  }
};

/// Global system B = S - k^2 M_V - i k Gamma_beta with the decomposition
/// retained. Dirichlet rows/columns are eliminated symmetrically with unit
/// diagonal (the unit entry lives in S).
struct AssembledSystem {
  std::shared_ptr<const FeSpace> space;
  ProblemSpec spec;
  double k = 0;
  RealSparseMatrix S;      // A-weighted stiffness (unit diagonal at Dirichlet nodes)
  RealSparseMatrix M_V;    // V^2-weighted mass (zeroed at Dirichlet nodes)
  RealSparseMatrix Gamma;  // beta-weighted boundary mass (impedance tags only)
  ComplexSparseMatrix B;
  CVec F;
  std::vector<std::uint8_t> dirichlet;  // 1 on eliminated nodes

  CVec apply_B(const CVec& v) const { return B.multiply_complex(v); }
  CVec apply_MAk(const CVec& v) const;  // (S + k^2 M_V) v
  RealSparseMatrix M_Ak() const;        // materialized S + k^2 M_V
  const RealSparseMatrix& M_A() const { return S; }
};

enum class EnergyMode { A, Ak };

/// ||v||_A = sqrt(v^* S v) or ||v||_{A,k} = sqrt(v^* (S + k^2 M_V) v).
double energy_norm(const AssembledSystem& system, const CVec& v, EnergyMode mode);

AssembledSystem assemble_global(std::shared_ptr<const FeSpace> space, const ProblemSpec& spec);

/// Right-hand side F(phi_j) = int_dOmega g phi_j + int_Omega f phi_j (plus
/// nodal point loads), with Dirichlet entries zeroed.
CVec assemble_rhs(const FeSpace& space, const ProblemSpec& spec,
                  const std::vector<std::uint8_t>& dirichlet);

// --- local (subdomain) systems -------------------------------------------

enum class ArtificialBc { impedance_ikV, dirichlet0 };

/// Forms over a union of whole elements. Nodes are the region's FE nodes in
/// increasing global order, excluding globally eliminated Dirichlet nodes.
/// `interface` marks nodes on the artificial boundary (closure of
/// d(region) intersected with Omega).
struct LocalSystem {
  std::vector<int> nodes;                // global node ids, sorted
  std::vector<std::uint8_t> is_interface;
  std::vector<int> interface;            // local indices, increasing
  ArtificialBc mode = ArtificialBc::impedance_ikV;

  ComplexSparseMatrix B_loc;   // local form incl. artificial BC treatment
  ComplexSparseMatrix B_phys;  // local form without artificial terms (harmonic constraint)
  RealSparseMatrix S;          // A-weighted stiffness over the region
  RealSparseMatrix M;          // V^2-weighted mass over the region

  int dim() const { return static_cast<int>(nodes.size()); }
};

LocalSystem assemble_local_system(const FeSpace& space, const ProblemSpec& spec,
                                  const std::vector<int>& elements, ArtificialBc mode,
                                  const std::vector<std::uint8_t>* global_dirichlet = nullptr);

/// The spec-level operation: local matrix over U_h(region).
ComplexSparseMatrix assemble_local(const FeSpace& space, const ProblemSpec& spec,
                                   const std::vector<int>& elements, ArtificialBc mode);

/// Region-restricted energy forms for norm evaluation on subsets.
struct RegionForms {
  std::vector<int> nodes;  // global ids
  RealSparseMatrix S, M;
};
RegionForms assemble_region_forms(const FeSpace& space, const ProblemSpec& spec,
                                  const std::vector<int>& elements,
                                  const std::vector<std::uint8_t>* global_dirichlet = nullptr);

/// ||w|_region||_{A[,k]} for a global coefficient vector w.
double region_energy_norm(const RegionForms& forms, double k, const CVec& w_global,
                          EnergyMode mode);

// --- error measurement ----------------------------------------------------

/// |v_h|_{H^1} seminorm (unit weight) of an FE coefficient vector.
double h1_seminorm(const FeSpace& space, const CVec& v);

/// |u - u_h|_{H^1} against an analytic gradient, by element quadrature.
double h1_seminorm_error(const FeSpace& space, const CVec& v,
                         const std::function<Eigen::Vector2cd(double, double)>& grad_exact);

}  // namespace msgfem
