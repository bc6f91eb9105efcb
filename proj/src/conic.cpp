#include "drcc/conic.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <Eigen/QR>
#include <Eigen/Sparse>
#include <Eigen/SparseLU>
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <limits>
#include <unordered_map>

namespace drcc {

std::string status_name(SolverStatus s) {
  switch (s) {
    case SolverStatus::optimal: return "optimal";
    case SolverStatus::near_optimal: return "near_optimal";
    case SolverStatus::infeasible: return "infeasible";
    case SolverStatus::unbounded: return "unbounded";
    case SolverStatus::numerical_failure: return "numerical_failure";
  }
  return "?";
}

namespace {

using Mat = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;
using Expr = std::unordered_map<int, double>;

// Equality rows removed by substitution: every original variable is y0 + sum N z over free z.
struct Elimination {
  int num_free = 0;
  std::vector<int> free_index;              // original var -> z index, or -1 for pivots
  std::vector<double> constant;             // y0
  std::vector<std::vector<std::pair<int, double>>> expr;  // pivots: terms over z
  std::vector<int> row_pivot;               // original row -> pivot var, or -1 when redundant or kept
  double inconsistency = 0;                 // largest rhs left on an emptied row
  // Rows whose substitution would fill the PSD blocks stay as constraints G z = g.
  std::vector<int> kept;
  std::vector<double> kept_scale;
  std::vector<std::vector<std::pair<int, double>>> G;
  std::vector<double> g;
};

// A row is substituted when its pivot expression is short or the pivot sits in few PSD entries.
constexpr std::size_t kShortExpr = 3;
constexpr long kMaxFill = 200;

Elimination eliminate(const ConicProblem& P) {
  const int m = P.num_vars, k = P.num_rows;
  std::vector<std::vector<std::pair<int, double>>> rows(k);
  for (const auto& t : P.equalities) rows[t.row].push_back({t.col, t.value});
  std::vector<double> rhs = P.rhs, scale(k, 1.0);
  for (int r = 0; r < k; ++r) {
    double s = 0;
    for (auto& [v, c] : rows[r]) s = std::max(s, std::abs(c));
    if (s > 0) {
      for (auto& [v, c] : rows[r]) c /= s;
      rhs[r] /= s;
      scale[r] = s;
    }
  }
  std::vector<int> order(k);
  for (int r = 0; r < k; ++r) order[r] = r;
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return rows[a].size() < rows[b].size(); });

  std::vector<int> row_count(m, 0);
  for (const auto& row : rows)
    for (const auto& [v, c] : row) ++row_count[v];
  // Substituting a pivot copies its expression into every PSD entry it occupies.
  std::vector<long> psd_count(m, 0);
  for (const auto& blk : P.blocks)
    for (const auto& e : blk.entries) psd_count[e.var] += e.row == e.col ? 1 : 2;

  std::vector<Expr> ex(m);
  std::vector<double> cst(m, 0.0);
  std::vector<char> is_pivot(m, 0);
  std::vector<std::vector<int>> occ(m);
  Elimination E;
  E.row_pivot.assign(k, -1);

  Expr acc;
  for (int r : order) {
    acc.clear();
    double b = rhs[r];
    for (const auto& [v, c] : rows[r]) {
      if (is_pivot[v]) {
        b -= c * cst[v];
        for (const auto& [u, cu] : ex[v]) acc[u] += c * cu;
      } else {
        acc[v] += c;
      }
      --row_count[v];
    }
    double amax = 0;
    for (const auto& [v, c] : acc) amax = std::max(amax, std::abs(c));
    if (amax <= 1e-11) {
      E.inconsistency = std::max(E.inconsistency, std::abs(b));
      continue;
    }
    int p = -1;
    for (const auto& [v, c] : acc) {
      if (std::abs(c) < 0.1 * amax) continue;
      if (p < 0) {
        p = v;
        continue;
      }
      const auto key_v = std::make_tuple(psd_count[v], row_count[v], -std::abs(c), v);
      const auto key_p = std::make_tuple(psd_count[p], row_count[p], -std::abs(acc[p]), p);
      if (key_v < key_p) p = v;
    }
    const double cp = acc[p];
    Expr e;
    for (const auto& [v, c] : acc)
      if (v != p && std::abs(c) > 1e-14 * amax) e[v] = -c / cp;
    if (e.size() > kShortExpr && psd_count[p] * static_cast<long>(e.size()) > kMaxFill) {
      E.kept.push_back(r);
      continue;
    }
    const double c0 = b / cp;
    // Previous pivots referencing p are rewritten in terms of the remaining free variables.
    for (int q : occ[p]) {
      auto it = ex[q].find(p);
      if (it == ex[q].end()) continue;
      const double coef = it->second;
      ex[q].erase(it);
      cst[q] += coef * c0;
      for (const auto& [u, cu] : e) {
        double& slot = ex[q][u];
        slot += coef * cu;
        occ[u].push_back(q);
      }
    }
    occ[p].clear();
    for (const auto& [u, cu] : e) occ[u].push_back(p);
    ex[p] = std::move(e);
    cst[p] = c0;
    is_pivot[p] = 1;
    E.row_pivot[r] = p;
  }

  E.free_index.assign(m, -1);
  for (int v = 0; v < m; ++v)
    if (!is_pivot[v]) E.free_index[v] = E.num_free++;
  E.constant.assign(m, 0.0);
  E.expr.resize(m);
  for (int v = 0; v < m; ++v) {
    if (!is_pivot[v]) continue;
    E.constant[v] = cst[v];
    for (const auto& [u, cu] : ex[v])
      if (std::abs(cu) > 1e-15) E.expr[v].push_back({E.free_index[u], cu});
    std::sort(E.expr[v].begin(), E.expr[v].end());
  }
  for (int r : E.kept) {
    std::unordered_map<int, double> row;
    double b = rhs[r];
    for (const auto& [v, c] : rows[r]) {
      if (E.free_index[v] >= 0) {
        row[E.free_index[v]] += c;
        continue;
      }
      b -= c * E.constant[v];
      for (const auto& [u, cu] : E.expr[v]) row[u] += c * cu;
    }
    std::vector<std::pair<int, double>> sparse;
    for (const auto& [u, c] : row)
      if (std::abs(c) > 1e-14) sparse.push_back({u, c});
    std::sort(sparse.begin(), sparse.end());
    E.G.push_back(std::move(sparse));
    E.g.push_back(b);
    E.kept_scale.push_back(scale[r]);
  }
  return E;
}

// Block of the reduced problem Z = C + sum_i z_i A_i; entries grouped by variable.
struct BlockData {
  int dim = 0;
  Mat C;
  std::vector<SymEntry> entries;  // upper triangle, merged
  std::vector<int> vars;
  std::vector<int> var_start;
  std::vector<int> rows, cols;    // mirrored
  std::vector<double> coefs;
};

BlockData reduce_block(const ConicBlock& b, const Elimination& E) {
  BlockData d;
  d.dim = b.dim;
  d.C = Mat::Zero(b.dim, b.dim);
  std::vector<SymEntry> raw;
  raw.reserve(b.entries.size());
  for (const auto& e : b.entries) {
    const int z = E.free_index[e.var];
    if (z >= 0) {
      raw.push_back({z, e.row, e.col, e.coef});
      continue;
    }
    const double c = e.coef * E.constant[e.var];
    d.C(e.row, e.col) += c;
    if (e.row != e.col) d.C(e.col, e.row) += c;
    for (const auto& [u, cu] : E.expr[e.var]) raw.push_back({u, e.row, e.col, e.coef * cu});
  }
  std::sort(raw.begin(), raw.end(), [](const SymEntry& a, const SymEntry& c) {
    return std::tie(a.var, a.row, a.col) < std::tie(c.var, c.row, c.col);
  });
  for (const auto& e : raw) {
    if (!d.entries.empty() && d.entries.back().var == e.var && d.entries.back().row == e.row &&
        d.entries.back().col == e.col)
      d.entries.back().coef += e.coef;
    else
      d.entries.push_back(e);
  }
  std::erase_if(d.entries, [](const SymEntry& e) { return std::abs(e.coef) < 1e-15; });
  for (std::size_t i = 0; i < d.entries.size(); ++i) {
    const auto& e = d.entries[i];
    if (d.vars.empty() || d.vars.back() != e.var) {
      d.vars.push_back(e.var);
      d.var_start.push_back(static_cast<int>(d.rows.size()));
    }
    d.rows.push_back(e.row);
    d.cols.push_back(e.col);
    d.coefs.push_back(e.coef);
    if (e.row != e.col) {
      d.rows.push_back(e.col);
      d.cols.push_back(e.row);
      d.coefs.push_back(e.coef);
    }
  }
  d.var_start.push_back(static_cast<int>(d.rows.size()));
  return d;
}

Mat apply_A(const BlockData& b, const Vec& z) {
  Mat Z = Mat::Zero(b.dim, b.dim);
  for (const auto& e : b.entries) {
    const double v = e.coef * z(e.var);
    Z(e.row, e.col) += v;
    if (e.row != e.col) Z(e.col, e.row) += v;
  }
  return Z;
}

// out_i += <A_i, M>.
void add_A_adjoint(const BlockData& b, const Mat& M, Vec& out) {
  for (const auto& e : b.entries) {
    const double v = e.row == e.col ? M(e.row, e.row) : M(e.row, e.col) + M(e.col, e.row);
    out(e.var) += e.coef * v;
  }
}

Mat sym(const Mat& M) { return 0.5 * (M + M.transpose()); }

// Largest alpha with M + alpha dM still positive definite (M = L L'); infinity if unbounded.
double max_step(const Eigen::LLT<Mat>& llt, const Mat& dM) {
  Mat T = llt.matrixL().solve(dM);
  T = llt.matrixL().solve(T.transpose()).transpose();
  T = sym(T);
  Eigen::SelfAdjointEigenSolver<Mat> es(T, Eigen::EigenvaluesOnly);
  const double lmin = es.eigenvalues()(0);
  if (lmin >= 0) return std::numeric_limits<double>::infinity();
  return -1.0 / lmin;
}

bool factor_with_regularization(const Mat& A, Eigen::LLT<Mat, Eigen::Lower>& llt) {
  llt.compute(A);
  if (llt.info() == Eigen::Success) return true;
  const double scale = std::max(1.0, A.diagonal().cwiseAbs().maxCoeff());
  for (double reg = 1e-14; reg < 1e-4; reg *= 100) {
    Mat B = A;
    B.diagonal().array() += reg * scale;
    llt.compute(B);
    if (llt.info() == Eigen::Success) return true;
  }
  return false;
}

// Cholesky of D A D with D = diag(A)^(-1/2); A is read from its lower triangle.
struct ScaledCholesky {
  Vec d;
  Eigen::LLT<Mat, Eigen::Lower> llt;
  bool factor(const Mat& A) {
    d = A.diagonal().cwiseMax(1e-300).cwiseSqrt().cwiseInverse();
    return factor_with_regularization(d.asDiagonal() * A * d.asDiagonal(), llt);
  }
  Vec solve(const Vec& b) const { return d.cwiseProduct(llt.solve(d.cwiseProduct(b))); }
  // L^{-1} D B for the factor L of D A D.
  Mat half_solve(const Mat& B) const { return llt.matrixL().solve(d.asDiagonal() * B); }
};

// Multipliers of the original equality rows from dual feasibility on the pivot columns.
Vec recover_multipliers(const ConicProblem& P, const Elimination& E, const std::vector<Mat>& X, const Vec& kept_lambda) {
  Vec lam = Vec::Zero(P.num_rows);
  for (std::size_t q = 0; q < E.kept.size(); ++q) lam(E.kept[q]) = kept_lambda(q) / E.kept_scale[q];
  Vec g = Vec::Zero(P.num_vars);
  for (int i = 0; i < P.num_vars; ++i) g(i) = P.objective[i];
  for (std::size_t j = 0; j < P.blocks.size(); ++j)
    for (const auto& e : P.blocks[j].entries) {
      const double v = e.row == e.col ? X[j](e.row, e.row) : 2.0 * X[j](e.row, e.col);
      g(e.var) += e.coef * v;
    }
  for (const auto& t : P.equalities) g(t.col) -= t.value * lam(t.row);
  std::vector<int> row_slot(P.num_rows, -1), var_slot(P.num_vars, -1);
  int n = 0;
  for (int r = 0; r < P.num_rows; ++r)
    if (E.row_pivot[r] >= 0) {
      row_slot[r] = n;
      var_slot[E.row_pivot[r]] = n;
      ++n;
    }
  if (n == 0) return lam;
  std::vector<Eigen::Triplet<double>> trip;
  for (const auto& t : P.equalities)
    if (row_slot[t.row] >= 0 && var_slot[t.col] >= 0) trip.emplace_back(var_slot[t.col], row_slot[t.row], t.value);
  Eigen::SparseMatrix<double> M(n, n);
  M.setFromTriplets(trip.begin(), trip.end());
  M.makeCompressed();
  Vec rhs(n);
  for (int v = 0; v < P.num_vars; ++v)
    if (var_slot[v] >= 0) rhs(var_slot[v]) = g(v);
  Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
  lu.compute(M);
  if (lu.info() != Eigen::Success) return lam;
  const Vec sol = lu.solve(rhs);
  for (int r = 0; r < P.num_rows; ++r)
    if (row_slot[r] >= 0) lam(r) = sol(row_slot[r]);
  return lam;
}

}  // namespace

ConicSolution solve_conic(const ConicProblem& P, const SolverSettings& S) {
  using clock = std::chrono::steady_clock;
  const Elimination El = eliminate(P);
  const int m = El.num_free;
  const int nb = static_cast<int>(P.blocks.size());

  std::vector<BlockData> blocks;
  blocks.reserve(nb);
  int total_dim = 0;
  double norm_C = 0;
  for (const auto& b : P.blocks) {
    blocks.push_back(reduce_block(b, El));
    total_dim += b.dim;
    norm_C += blocks.back().C.squaredNorm();
  }
  norm_C = std::sqrt(norm_C);
  Vec b = Vec::Zero(m);
  double obj_const = 0;
  for (int i = 0; i < P.num_vars; ++i) {
    const double bi = P.objective[i];
    if (bi == 0) continue;
    if (El.free_index[i] >= 0) {
      b(El.free_index[i]) += bi;
    } else {
      obj_const += bi * El.constant[i];
      for (const auto& [u, cu] : El.expr[i]) b(u) += bi * cu;
    }
  }
  const double norm_b = b.norm();
  if (S.verbose)
    std::fprintf(stderr, "presolve: %d variables, %d rows -> %d free variables, inconsistency %.2e\n", P.num_vars,
                 P.num_rows, m, El.inconsistency);

  // Kept rows, with linearly dependent ones dropped.
  Mat G(0, m);
  Vec g(0);
  std::vector<int> indep;
  if (!El.kept.empty()) {
    const int k = static_cast<int>(El.kept.size());
    Mat Gt = Mat::Zero(m, k);
    for (int q = 0; q < k; ++q)
      for (const auto& [u, c] : El.G[q]) Gt(u, q) = c;
    Eigen::ColPivHouseholderQR<Mat> qr(Gt);
    qr.setThreshold(1e-10);
    const int rank = static_cast<int>(qr.rank());
    for (int t = 0; t < rank; ++t) indep.push_back(qr.colsPermutation().indices()(t));
    std::sort(indep.begin(), indep.end());
    G.resize(rank, m);
    g.resize(rank);
    for (int t = 0; t < rank; ++t) {
      G.row(t) = Gt.col(indep[t]).transpose();
      g(t) = El.g[indep[t]];
    }
  }
  const int kr = static_cast<int>(G.rows());
  const double norm_g = g.norm();
  if (S.verbose) std::fprintf(stderr, "kept rows: %zu (%d independent)\n", El.kept.size(), kr);

  Vec z = Vec::Zero(m);
  Vec lam = Vec::Zero(kr);
  std::vector<Mat> X(nb), Z(nb);
  for (int j = 0; j < nb; ++j) {
    const double s = std::max(10.0, std::sqrt(static_cast<double>(blocks[j].dim)));
    X[j] = s * Mat::Identity(blocks[j].dim, blocks[j].dim);
    Z[j] = s * Mat::Identity(blocks[j].dim, blocks[j].dim);
  }

  struct Best {
    SolverStatus status = SolverStatus::numerical_failure;
    Vec z, lam;
    std::vector<Mat> X;
    double pobj = 0, dobj = 0, rel_gap = 0, pinf = 0, dinf = 0;
    int it = 0;
    double merit = std::numeric_limits<double>::infinity();
  } best;
  auto record = [&](SolverStatus st, double pobj, double dobj, double rg, double pinf, double dinf, int it) {
    const double merit = std::max({rg, pinf, dinf});
    if (merit < best.merit || st == SolverStatus::optimal) {
      best.merit = merit;
      best.status = st;
      best.z = z;
      best.lam = lam;
      best.X = X;
      best.pobj = pobj;
      best.dobj = dobj;
      best.rel_gap = rg;
      best.pinf = pinf;
      best.dinf = dinf;
      best.it = it;
    }
  };

  Mat H(m, m);
  Mat U, V, Pm, Y, Sk;
  int stall = 0;
  bool done = false;
  for (int it = 0; it <= S.max_iter && !done; ++it) {
    const auto t0 = clock::now();
    std::vector<Mat> Rd(nb);
    double rd_norm = 0, xz = 0, cx = 0;
    for (int j = 0; j < nb; ++j) {
      Rd[j] = blocks[j].C + apply_A(blocks[j], z) - Z[j];
      rd_norm += Rd[j].squaredNorm();
      xz += X[j].cwiseProduct(Z[j]).sum();
      cx += blocks[j].C.cwiseProduct(X[j]).sum();
    }
    Vec rg = g;
    if (kr > 0) rg.noalias() -= G * z;
    rd_norm = std::sqrt(rd_norm + rg.squaredNorm());
    Vec rp = -b;
    if (kr > 0) rp += G.transpose() * lam;
    {
      Vec ax = Vec::Zero(m);
      for (int j = 0; j < nb; ++j) add_A_adjoint(blocks[j], X[j], ax);
      rp -= ax;
    }
    const double pobj = b.dot(z) + obj_const, dobj = cx + g.dot(lam) + obj_const;
    const double mu = xz / total_dim;
    const double denom = 1.0 + std::abs(pobj) + std::abs(dobj);
    const double rel_gap = std::abs(pobj - dobj) / denom;
    const double comp = xz / denom;
    const double pinf = rd_norm / (1.0 + norm_C + norm_g);
    const double dinf = rp.norm() / (1.0 + norm_b);
    if (S.verbose)
      std::fprintf(stderr, "it %3d  pobj % .10e  dobj % .10e  gap %.2e  comp %.2e  pinf %.2e  dinf %.2e\n", it, pobj,
                   dobj, rel_gap, comp, pinf, dinf);
    const double gap_measure = std::max(rel_gap, comp);
    if (gap_measure <= S.gap_tol && pinf <= S.feas_tol && dinf <= S.feas_tol) {
      record(SolverStatus::optimal, pobj, dobj, gap_measure, pinf, dinf, it);
      break;
    }
    record(SolverStatus::near_optimal, pobj, dobj, gap_measure, pinf, dinf, it);
    // Close to optimal but no longer improving.
    if (best.merit < 1e-6 && it - best.it >= 5) break;
    if (it == S.max_iter) break;
    if (dobj < -1e10 && pinf > 1e-3) {
      best.status = SolverStatus::infeasible;
      break;
    }
    if (pobj > 1e10 && dinf > 1e-3) {
      best.status = SolverStatus::unbounded;
      break;
    }

    std::vector<Mat> W(nb);
    std::vector<Eigen::LLT<Mat>> Xf(nb), Zf(nb);
    bool ok = true;
    for (int j = 0; j < nb && ok; ++j) {
      Zf[j].compute(Z[j]);
      Xf[j].compute(X[j]);
      if (Zf[j].info() != Eigen::Success || Xf[j].info() != Eigen::Success) {
        ok = false;
        break;
      }
      W[j] = sym(Zf[j].solve(Mat::Identity(blocks[j].dim, blocks[j].dim)));
    }
    if (!ok) break;

    // H_il = sum_j <A_i, X A_l W>.
    H.setZero();
    for (int j = 0; j < nb; ++j) {
      const BlockData& bd = blocks[j];
      const int n = bd.dim;
      for (std::size_t vi = 0; vi < bd.vars.size(); ++vi) {
        const int l = bd.vars[vi];
        const int s0 = bd.var_start[vi], s1 = bd.var_start[vi + 1];
        const int kk = s1 - s0;
        U.resize(n, kk);
        V.resize(kk, n);
        for (int t = 0; t < kk; ++t) {
          U.col(t) = bd.coefs[s0 + t] * X[j].col(bd.rows[s0 + t]);
          V.row(t) = W[j].row(bd.cols[s0 + t]);
        }
        Pm.noalias() = U * V;
        double* Hl = H.col(l).data();
        for (const auto& en : bd.entries) {
          if (en.var < l) continue;
          const double v = en.row == en.col ? Pm(en.row, en.row) : Pm(en.row, en.col) + Pm(en.col, en.row);
          Hl[en.var] += en.coef * v;
        }
      }
    }
    const auto tH = clock::now();
    ScaledCholesky Hf;
    if (!Hf.factor(H)) break;
    // Schur complement of the kept rows: G H^{-1} G'.
    ScaledCholesky Sf;
    if (kr > 0) {
      Y = Hf.half_solve(G.transpose());
      Sk.noalias() = Y.transpose() * Y;
      if (!Sf.factor(Sk)) break;
    }
    if (S.verbose)
      std::fprintf(stderr, "   H %.2fs  factor %.2fs\n", std::chrono::duration<double>(tH - t0).count(),
                   std::chrono::duration<double>(clock::now() - tH).count());

    // Newton system: H dz = A*(base) - rp, base = sigma mu W - X - X Rd W - corr.
    auto direction = [&](double sigma_mu, const std::vector<Mat>* corr, Vec& dz, Vec& dl, std::vector<Mat>& dX,
                         std::vector<Mat>& dZ) {
      Vec r1 = -rp;
      std::vector<Mat> base(nb);
      for (int j = 0; j < nb; ++j) {
        base[j] = sigma_mu * W[j] - X[j];
        if (corr) base[j] -= (*corr)[j];
        add_A_adjoint(blocks[j], base[j] - X[j] * Rd[j] * W[j], r1);
      }
      // [H G'; G 0] (dz, dl) = (r1, rg), with iterative refinement against the unregularized H.
      auto saddle = [&](const Vec& a, const Vec& c, Vec& x, Vec& y) {
        if (kr > 0) {
          y = Sf.solve(G * Hf.solve(a) - c);
          x = Hf.solve(a - G.transpose() * y);
        } else {
          x = Hf.solve(a);
          y.resize(0);
        }
      };
      saddle(r1, rg, dz, dl);
      for (int pass = 0; pass < 3; ++pass) {
        Vec ea = r1 - H.selfadjointView<Eigen::Lower>() * dz;
        Vec ec = rg;
        if (kr > 0) {
          ea.noalias() -= G.transpose() * dl;
          ec.noalias() -= G * dz;
        }
        if (std::max(ea.lpNorm<Eigen::Infinity>(), kr > 0 ? ec.lpNorm<Eigen::Infinity>() : 0.0) <=
            1e-14 * (1.0 + r1.lpNorm<Eigen::Infinity>()))
          break;
        Vec cx, cy;
        saddle(ea, ec, cx, cy);
        dz += cx;
        if (kr > 0) dl += cy;
      }
      dX.resize(nb);
      dZ.resize(nb);
      for (int j = 0; j < nb; ++j) {
        dZ[j] = apply_A(blocks[j], dz) + Rd[j];
        dX[j] = sym(base[j] - X[j] * dZ[j] * W[j]);
      }
    };
    auto step_lengths = [&](const std::vector<Mat>& dX, const std::vector<Mat>& dZ, double& ap, double& ad) {
      ap = ad = std::numeric_limits<double>::infinity();
      for (int j = 0; j < nb; ++j) {
        ap = std::min(ap, max_step(Xf[j], dX[j]));
        ad = std::min(ad, max_step(Zf[j], dZ[j]));
      }
    };

    Vec dz_a, dl_a;
    std::vector<Mat> dX_a, dZ_a;
    direction(0.0, nullptr, dz_a, dl_a, dX_a, dZ_a);
    double ap_a, ad_a;
    step_lengths(dX_a, dZ_a, ap_a, ad_a);
    ap_a = std::min(1.0, ap_a);
    ad_a = std::min(1.0, ad_a);
    double xz_aff = 0;
    for (int j = 0; j < nb; ++j) xz_aff += ((X[j] + ap_a * dX_a[j]).cwiseProduct(Z[j] + ad_a * dZ_a[j])).sum();
    double sigma = std::pow(std::clamp(xz_aff / total_dim / mu, 0.0, 1.0), 3);
    if (std::max(pinf, dinf) > 1e-2) sigma = std::max(sigma, 0.1);

    std::vector<Mat> corr(nb);
    for (int j = 0; j < nb; ++j) corr[j] = dX_a[j] * dZ_a[j] * W[j];
    Vec dz, dl;
    std::vector<Mat> dX, dZ;
    direction(sigma * mu, &corr, dz, dl, dX, dZ);
    double ap, ad;
    step_lengths(dX, dZ, ap, ad);
    ap = std::min(1.0, S.step_fraction * ap);
    ad = std::min(1.0, S.step_fraction * ad);
    for (int j = 0; j < nb; ++j) {
      X[j] += ap * dX[j];
      Z[j] += ad * dZ[j];
    }
    z += ad * dz;
    if (kr > 0) lam += ap * dl;

    if (S.verbose)
      std::fprintf(stderr, "        sigma %.2e  ap %.3f  ad %.3f  (%.2fs)\n", sigma, ap, ad,
                   std::chrono::duration<double>(clock::now() - t0).count());
    if (std::max(ap, ad) < 1e-8) {
      if (++stall >= 3) done = true;
    } else {
      stall = 0;
    }
  }

  ConicSolution sol;
  sol.status = best.status;
  if (sol.status == SolverStatus::near_optimal &&
      !(best.rel_gap <= 1e-5 && best.pinf <= 1e-5 && best.dinf <= 1e-5))
    sol.status = SolverStatus::numerical_failure;
  double kept_residual = 0;
  if (best.z.size() == m)
    for (std::size_t q = 0; q < El.kept.size(); ++q) {
      double r = El.g[q];
      for (const auto& [u, c] : El.G[q]) r -= c * best.z(u);
      kept_residual = std::max(kept_residual, std::abs(r));
    }
  if ((El.inconsistency > 1e-8 || kept_residual > 1e-5) && sol.status != SolverStatus::unbounded)
    sol.status = SolverStatus::infeasible;
  sol.y = Vec::Zero(P.num_vars);
  if (best.z.size() == m) {
    for (int i = 0; i < P.num_vars; ++i) {
      if (El.free_index[i] >= 0) {
        sol.y(i) = best.z(El.free_index[i]);
      } else {
        double v = El.constant[i];
        for (const auto& [u, cu] : El.expr[i]) v += cu * best.z(u);
        sol.y(i) = v;
      }
    }
  }
  sol.X = best.X.empty() ? X : best.X;
  Vec kept_lambda = Vec::Zero(static_cast<int>(El.kept.size()));
  if (best.lam.size() == kr)
    for (int t = 0; t < kr; ++t) kept_lambda(indep[t]) = best.lam(t);
  sol.lambda = recover_multipliers(P, El, sol.X, kept_lambda);
  sol.primal_objective = best.pobj;
  sol.dual_objective = best.dobj;
  sol.gap = std::abs(best.pobj - best.dobj);
  sol.rel_gap = best.rel_gap;
  sol.primal_infeasibility = best.pinf;
  sol.dual_infeasibility = best.dinf;
  sol.iterations = best.it;
  sol.eliminated_rows = 0;
  for (int p : El.row_pivot) sol.eliminated_rows += p >= 0;
  sol.free_variables = m;
  sol.kept_rows = kr;
  return sol;
}

}  // namespace drcc
