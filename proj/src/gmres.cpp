#include "msgfem/gmres.hpp"

#include <cmath>

namespace msgfem {

namespace {

struct BNorm {
  const LinearOperator* mb;  // null: Euclidean

  CVec weight(const CVec& v) const { return mb && *mb ? (*mb)(v) : v; }
  // (x, y)_b with the cached weighted vector my = M_b * y.
  static Complex dot(const CVec& y_weighted, const CVec& x) { return y_weighted.dot(x); }
  static double norm(const CVec& v, const CVec& v_weighted) {
    return std::sqrt(std::max(0.0, std::real(v_weighted.dot(v))));
  }
};

}  // namespace

GmresResult gmres(const LinearOperator& apply, const CVec& rhs, const CVec& x0,
                  const GmresConfig& cfg) {
  if (cfg.relative_tolerance <= 0) throw Error("gmres: relative_tolerance must be > 0");
  if (cfg.restart && *cfg.restart < 1) throw Error("gmres: restart must be >= 1");
  const int n = static_cast<int>(rhs.size());
  BNorm bn{&cfg.b_matvec};

#ifndef NDEBUG
  {
    // randomized linearity probe
    CVec u = CVec::Random(n), v = CVec::Random(n);
    const Complex a(0.37, -1.21), b(-0.58, 0.77);
    CVec lhs = apply(a * u + b * v);
    CVec rhsp = a * apply(u) + b * apply(v);
    if ((lhs - rhsp).norm() > 1e-8 * (lhs.norm() + rhsp.norm() + 1e-30))
      throw Error("gmres: operator failed linearity probe");
  }
#endif

  GmresResult out;
  out.x = x0;
  SolveReport& rep = out.report;

  CVec r = rhs - apply(out.x);
  CVec rw = bn.weight(r);
  double beta = BNorm::norm(r, rw);
  const double target = cfg.relative_tolerance * beta;
  rep.residual_history.push_back(beta);
  if (beta == 0.0) {
    rep.status = SolveReport::Status::converged;
    return out;
  }

  const int cycle_len = cfg.restart ? *cfg.restart : cfg.max_iterations;
  int total_iters = 0;
  bool done = false;

  while (!done && total_iters < cfg.max_iterations) {
    const int m = std::min(cycle_len, cfg.max_iterations - total_iters);
    std::vector<CVec> V, W;  // Krylov basis and its M_b-weighted copy
    V.reserve(m + 1);
    W.reserve(m + 1);
    V.push_back(r / beta);
    W.push_back(rw / beta);

    CMat H = CMat::Zero(m + 1, m);
    std::vector<Complex> cs(m), sn(m);
    CVec g = CVec::Zero(m + 1);
    g[0] = beta;
    int j_used = 0;
    bool cycle_done = false;

    for (int j = 0; j < m && !cycle_done; ++j) {
      CVec w = apply(V[j]);
      CVec mw = bn.weight(w);
      for (int i = 0; i <= j; ++i) {
        Complex h = BNorm::dot(W[i], w);
        H(i, j) = h;
        w -= h * V[i];
        mw -= h * W[i];
      }
      double h_next = BNorm::norm(w, mw);
      H(j + 1, j) = h_next;
      const bool happy = h_next <= 1e-14 * beta;
      if (!happy) {
        V.push_back(w / h_next);
        W.push_back(mw / h_next);
      }

      // Givens rotations keep the least-squares residual explicit.
      for (int i = 0; i < j; ++i) {
        Complex t = std::conj(cs[i]) * H(i, j) + std::conj(sn[i]) * H(i + 1, j);
        H(i + 1, j) = -sn[i] * H(i, j) + cs[i] * H(i + 1, j);
        H(i, j) = t;
      }
      double denom = std::hypot(std::abs(H(j, j)), std::abs(H(j + 1, j)));
      if (denom == 0.0) {
        cs[j] = 1.0;
        sn[j] = 0.0;
      } else {
        cs[j] = H(j, j) / denom;
        sn[j] = H(j + 1, j) / denom;
      }
      H(j, j) = std::conj(cs[j]) * H(j, j) + std::conj(sn[j]) * H(j + 1, j);
      H(j + 1, j) = 0.0;
      g[j + 1] = -sn[j] * g[j];
      g[j] = std::conj(cs[j]) * g[j];

      double res = std::abs(g[j + 1]);
      rep.residual_history.push_back(res);
      ++total_iters;
      j_used = j + 1;
      if (happy) {
        rep.exact_solution = true;
        rep.status = SolveReport::Status::converged;
        cycle_done = done = true;
      } else if (res <= target) {
        rep.status = SolveReport::Status::converged;
        cycle_done = done = true;
      }
    }

    if (j_used > 0) {
      // back-substitution on the triangularized Hessenberg system
      CVec y = CVec::Zero(j_used);
      for (int i = j_used - 1; i >= 0; --i) {
        Complex s = g[i];
        for (int l = i + 1; l < j_used; ++l) s -= H(i, l) * y[l];
        y[i] = s / H(i, i);
      }
      for (int i = 0; i < j_used; ++i) out.x += y[i] * V[i];
    }

    if (!done) {
      r = rhs - apply(out.x);
      rw = bn.weight(r);
      beta = BNorm::norm(r, rw);
      if (!cfg.restart) break;  // unrestarted: max_iterations reached
    }
  }

  rep.iterations = total_iters;
  if (!done) rep.status = SolveReport::Status::stagnated;
  return out;
}

}  // namespace msgfem
