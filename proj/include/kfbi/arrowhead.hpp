#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "kfbi/exec.hpp"
#include "kfbi/fast_poisson.hpp"

namespace kfbi {

/// Split of unknowns 0..n-1 into m contiguous blocks separated by m-1
/// single-unknown separators: block 0, sep 0, block 1, ..., block m-1.
struct PartitionMap {
  std::size_t n = 0;
  std::vector<std::size_t> block_begin;  // [begin, end) per block
  std::vector<std::size_t> block_end;
  std::vector<std::size_t> separators;

  int blocks() const { return static_cast<int>(block_begin.size()); }
  std::size_t block_size(int k) const { return block_end[k] - block_begin[k]; }

  /// Block sizes within one of each other, each at least 2.
  static PartitionMap balanced(std::size_t n, int m);
  /// Explicit separator positions (ascending); blocks in between must be
  /// nonempty.
  static PartitionMap with_separators(std::size_t n, std::vector<std::size_t> separators);
};

/// Arrowhead form (S, W_R; W_L, H) of a scalar tridiagonal system.
class ArrowheadSystem {
public:
  static ArrowheadSystem decompose(const TridiagonalSystem& a, int m);
  static ArrowheadSystem decompose(const TridiagonalSystem& a, PartitionMap map);

  const PartitionMap& partition() const { return map_; }
  int blocks() const { return map_.blocks(); }

  /// Caches Z^k = S_k^-1 W_R^k and LU-factorises the Schur complement.
  void precompute_schur();
  bool precomputed() const { return precomputed_; }

  std::vector<double> solve(std::span<const double> f, ExecPolicy exec = ExecPolicy::serial) const;

  // Pieces of solve(), usable from separate workers.
  /// z^k = S_k^-1 f_k, in place on the block's slice of the right-hand side.
  void block_solve(int k, std::span<double> f_block) const;
  /// Right-hand side of separator s given its row value f_sep, the last
  /// entry of z^s and the first entry of z^{s+1}.
  double separator_rhs(int s, double f_sep, double z_last, double z_next_first) const;
  std::vector<double> solve_separators(std::span<const double> g) const;
  /// s^k = z^k - Z^k_left h_{k-1} - Z^k_right h_k (h outside the range is 0).
  void back_substitute(int k, std::span<double> z, double h_left, double h_right) const;

  const TridiagonalSystem& block(int k) const { return blocks_[k]; }
  std::span<const double> z_left(int k) const { return z_left_[k]; }
  std::span<const double> z_right(int k) const { return z_right_[k]; }
  /// Dense (m-1)x(m-1) Schur complement H - W_L S^-1 W_R.
  Eigen::MatrixXd schur_complement() const { return schur_; }
  /// Original matrix rebuilt from the blocks and couplings (rhs empty).
  TridiagonalSystem reassemble() const;

private:
  PartitionMap map_;
  std::vector<TridiagonalSystem> blocks_;
  std::vector<double> wr_first_;  // A(first_k, first_k - 1), couples to separator k-1
  std::vector<double> wr_last_;   // A(last_k, last_k + 1), couples to separator k
  std::vector<double> wl_prev_;   // A(sep_s, sep_s - 1)
  std::vector<double> wl_next_;   // A(sep_s, sep_s + 1)
  std::vector<double> h_diag_;
  std::vector<std::vector<double>> z_left_, z_right_;
  Eigen::MatrixXd schur_;
  Eigen::PartialPivLU<Eigen::MatrixXd> lu_;
  bool precomputed_ = false;
};

}  // namespace kfbi
