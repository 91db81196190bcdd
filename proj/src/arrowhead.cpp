#include "kfbi/arrowhead.hpp"

#include <cmath>
#include <string>

#include "kfbi/error.hpp"

namespace kfbi {

PartitionMap PartitionMap::balanced(std::size_t n, int m) {
  if (m < 1) fail(ErrorKind::invalid_parameter, "block count must be positive");
  const auto mm = static_cast<std::size_t>(m);
  if (n < 3 * mm - 1)
    fail(ErrorKind::too_small, "system of size " + std::to_string(n) + " cannot be split into " +
                                   std::to_string(m) + " blocks");
  const std::size_t q = n - (mm - 1);
  std::vector<std::size_t> seps;
  std::size_t pos = 0;
  for (std::size_t k = 0; k + 1 < mm; ++k) {
    pos += q / mm + (k < q % mm ? 1 : 0);
    seps.push_back(pos);
    ++pos;
  }
  return with_separators(n, std::move(seps));
}

PartitionMap PartitionMap::with_separators(std::size_t n, std::vector<std::size_t> separators) {
  PartitionMap p;
  p.n = n;
  std::size_t begin = 0;
  for (std::size_t s : separators) {
    if (s <= begin || s >= n) fail(ErrorKind::too_small, "separators leave an empty block");
    p.block_begin.push_back(begin);
    p.block_end.push_back(s);
    begin = s + 1;
  }
  if (begin >= n) fail(ErrorKind::too_small, "separators leave an empty block");
  p.block_begin.push_back(begin);
  p.block_end.push_back(n);
  p.separators = std::move(separators);
  return p;
}

ArrowheadSystem ArrowheadSystem::decompose(const TridiagonalSystem& a, int m) {
  return decompose(a, PartitionMap::balanced(a.size(), m));
}

ArrowheadSystem ArrowheadSystem::decompose(const TridiagonalSystem& a, PartitionMap map) {
  const std::size_t n = a.size();
  if (map.n != n) fail(ErrorKind::size, "partition does not match the system size");
  if (a.lower.size() != n || a.upper.size() != n) fail(ErrorKind::size, "inconsistent tridiagonal system");
  ArrowheadSystem sys;
  sys.map_ = std::move(map);
  const int m = sys.map_.blocks();
  for (int k = 0; k < m; ++k) {
    const std::size_t b = sys.map_.block_begin[k], e = sys.map_.block_end[k];
    TridiagonalSystem s;
    s.lower.assign(a.lower.begin() + b, a.lower.begin() + e);
    s.diag.assign(a.diag.begin() + b, a.diag.begin() + e);
    s.upper.assign(a.upper.begin() + b, a.upper.begin() + e);
    sys.wr_first_.push_back(s.lower.front());
    sys.wr_last_.push_back(s.upper.back());
    s.lower.front() = 0.0;
    s.upper.back() = 0.0;
    sys.blocks_.push_back(std::move(s));
  }
  sys.wr_first_.front() = 0.0;
  sys.wr_last_.back() = 0.0;
  for (std::size_t s : sys.map_.separators) {
    sys.wl_prev_.push_back(a.lower[s]);
    sys.wl_next_.push_back(a.upper[s]);
    sys.h_diag_.push_back(a.diag[s]);
  }
  return sys;
}

void ArrowheadSystem::block_solve(int k, std::span<double> f_block) const {
  const TridiagonalSystem& s = blocks_[k];
  try {
    thomas_solve_inplace(s.lower, s.diag, s.upper, f_block.data(), s.size());
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::zero_pivot) throw;
    fail(ErrorKind::singular_block, "block " + std::to_string(k) + ": " + e.what());
  }
}

void ArrowheadSystem::precompute_schur() {
  const int m = blocks();
  z_left_.assign(m, {});
  z_right_.assign(m, {});
  for (int k = 0; k < m; ++k) {
    const std::size_t len = blocks_[k].size();
    if (k > 0) {
      z_left_[k].assign(len, 0.0);
      z_left_[k].front() = wr_first_[k];
      block_solve(k, z_left_[k]);
    }
    if (k + 1 < m) {
      z_right_[k].assign(len, 0.0);
      z_right_[k].back() = wr_last_[k];
      block_solve(k, z_right_[k]);
    }
  }
  const int ns = m - 1;
  schur_ = Eigen::MatrixXd::Zero(ns, ns);
  for (int s = 0; s < ns; ++s) {
    // Separator s sits between block s (its last unknown) and block s+1.
    schur_(s, s) = h_diag_[s] - wl_prev_[s] * z_right_[s].back() - wl_next_[s] * z_left_[s + 1].front();
    if (s > 0) schur_(s, s - 1) = -wl_prev_[s] * z_left_[s].back();
    if (s + 1 < ns) schur_(s, s + 1) = -wl_next_[s] * z_right_[s + 1].front();
  }
  if (ns > 0) {
    lu_.compute(schur_);
    const auto& u = lu_.matrixLU();
    for (int s = 0; s < ns; ++s)
      if (u(s, s) == 0.0 || !std::isfinite(u(s, s)))
        fail(ErrorKind::singular_system, "singular Schur complement");
  }
  precomputed_ = true;
}

double ArrowheadSystem::separator_rhs(int s, double f_sep, double z_last, double z_next_first) const {
  return f_sep - wl_prev_[s] * z_last - wl_next_[s] * z_next_first;
}

std::vector<double> ArrowheadSystem::solve_separators(std::span<const double> g) const {
  const int ns = blocks() - 1;
  if (static_cast<int>(g.size()) != ns) fail(ErrorKind::size, "separator right-hand side length");
  if (ns == 0) return {};
  Eigen::VectorXd rhs = Eigen::Map<const Eigen::VectorXd>(g.data(), ns);
  Eigen::VectorXd h = lu_.solve(rhs);
  return {h.data(), h.data() + ns};
}

void ArrowheadSystem::back_substitute(int k, std::span<double> z, double h_left, double h_right) const {
  if (k > 0)
    for (std::size_t i = 0; i < z.size(); ++i) z[i] -= z_left_[k][i] * h_left;
  if (k + 1 < blocks())
    for (std::size_t i = 0; i < z.size(); ++i) z[i] -= z_right_[k][i] * h_right;
}

std::vector<double> ArrowheadSystem::solve(std::span<const double> f, ExecPolicy exec) const {
  if (!precomputed_) fail(ErrorKind::invalid_parameter, "precompute_schur must run before solve");
  if (f.size() != map_.n) fail(ErrorKind::size, "right-hand side length mismatch");
  const int m = blocks();
  std::vector<double> u(f.begin(), f.end());
  auto slice = [&](int k) {
    return std::span<double>(u).subspan(map_.block_begin[k], map_.block_size(k));
  };
  parallel_for(m, exec, [&](long k) { block_solve(static_cast<int>(k), slice(static_cast<int>(k))); });

  std::vector<double> g(static_cast<std::size_t>(m - 1));
  for (int s = 0; s + 1 < m; ++s)
    g[s] = separator_rhs(s, u[map_.separators[s]], u[map_.block_end[s] - 1], u[map_.block_begin[s + 1]]);
  const std::vector<double> h = solve_separators(g);
  for (int s = 0; s + 1 < m; ++s) u[map_.separators[s]] = h[s];

#pragma omp parallel for if (is_parallel(exec)) schedule(static)
  for (int k = 0; k < m; ++k)
    back_substitute(k, slice(k), k > 0 ? h[k - 1] : 0.0, k + 1 < m ? h[k] : 0.0);
  return u;
}

TridiagonalSystem ArrowheadSystem::reassemble() const {
  const std::size_t n = map_.n;
  TridiagonalSystem a;
  a.lower.assign(n, 0.0);
  a.diag.assign(n, 0.0);
  a.upper.assign(n, 0.0);
  for (int k = 0; k < blocks(); ++k) {
    const std::size_t b = map_.block_begin[k];
    const TridiagonalSystem& s = blocks_[k];
    for (std::size_t i = 0; i < s.size(); ++i) {
      a.lower[b + i] = s.lower[i];
      a.diag[b + i] = s.diag[i];
      a.upper[b + i] = s.upper[i];
    }
    a.lower[b] = wr_first_[k];
    a.upper[map_.block_end[k] - 1] = wr_last_[k];
  }
  for (std::size_t s = 0; s < map_.separators.size(); ++s) {
    const std::size_t r = map_.separators[s];
    a.lower[r] = wl_prev_[s];
    a.diag[r] = h_diag_[s];
    a.upper[r] = wl_next_[s];
  }
  return a;
}

}  // namespace kfbi
