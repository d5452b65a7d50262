#pragma once

#include <complex>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace msgfem {

using Complex = std::complex<double>;
using CVec = Eigen::VectorXcd;
using RVec = Eigen::VectorXd;
using CMat = Eigen::MatrixXcd;
using RMat = Eigen::MatrixXd;

constexpr Complex kImagUnit{0.0, 1.0};

/// Base class for all toolkit errors.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

#define MSGFEM_DEFINE_ERROR(Name)        \
  struct Name : Error {                  \
    using Error::Error;                  \
  };

// linalg_core
MSGFEM_DEFINE_ERROR(SingularMatrix)
MSGFEM_DEFINE_ERROR(NotConverged)
MSGFEM_DEFINE_ERROR(DimensionMismatch)
// mesh_fespace
MSGFEM_DEFINE_ERROR(InvalidDimensions)
MSGFEM_DEFINE_ERROR(UnsupportedDegree)
MSGFEM_DEFINE_ERROR(PointOutsideDomain)
// model_problem
MSGFEM_DEFINE_ERROR(CoefficientOutOfBounds)
MSGFEM_DEFINE_ERROR(EmptyRegion)
MSGFEM_DEFINE_ERROR(MalformedFile)
MSGFEM_DEFINE_ERROR(NonpositiveVelocity)
// dd_partition
MSGFEM_DEFINE_ERROR(OverlapExceedsDomain)
MSGFEM_DEFINE_ERROR(IndexOutOfRange)
// spectral_coarse
MSGFEM_DEFINE_ERROR(SingularLocalMatrix)
MSGFEM_DEFINE_ERROR(EigSolveFailure)
MSGFEM_DEFINE_ERROR(TooFewHarmonicDofs)
MSGFEM_DEFINE_ERROR(SingularCoarseMatrix)
// msgfem_solver
MSGFEM_DEFINE_ERROR(NotSetUp)
MSGFEM_DEFINE_ERROR(Diverged)
// experiments_cli
MSGFEM_DEFINE_ERROR(CriterionUnreachable)
MSGFEM_DEFINE_ERROR(ConfigError)

#undef MSGFEM_DEFINE_ERROR

/// Number of worker threads to use. Honours OMP settings and the
/// MSGFEM_THREADS environment variable (whichever is smaller).
int max_threads();

/// Installs the MSGFEM_THREADS cap into the OpenMP runtime. Called once by
/// every executable entry point; safe to call repeatedly.
void init_threading();

}  // namespace msgfem
