#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "neqsteady/errors.hpp"
#include "neqsteady/log.hpp"

namespace neqsteady {

// One dissipation channel: a positive gap omega = levels[upper] - levels[lower].
// Genericity (validated below) makes the (upper, lower) pair unique per omega.
struct BohrEntry {
  double omega;
  int upper;
  int lower;
};

struct BohrTable {
  std::vector<BohrEntry> entries;  // sorted by omega, N(N-1)/2 of them

  const BohrEntry& by_pair(int m, int n) const {
    // (m, n) in either order; channels are keyed by the unordered pair.
    for (const auto& e : entries)
      if ((e.upper == m && e.lower == n) || (e.upper == n && e.lower == m)) return e;
    fail_validation("InconsistentDimensions", "no Bohr channel for pair (" + std::to_string(m) +
                                                  "," + std::to_string(n) + ")");
  }

  int index_of_pair(int m, int n) const {
    for (std::size_t i = 0; i < entries.size(); ++i) {
      const auto& e = entries[i];
      if ((e.upper == m && e.lower == n) || (e.upper == n && e.lower == m))
        return static_cast<int>(i);
    }
    fail_validation("InconsistentDimensions", "no Bohr channel for pair");
  }
};

// Validated system: strictly increasing energies, pairwise-distinct gaps,
// one complex dipole matrix per reservoir. Level indices are 0-based.
// Only |d(l, u)|^2 with l the lower and u the upper level of a channel enters
// any rate; diagonal dipole entries are dynamically inert.
struct SystemSpec {
  Eigen::VectorXd levels;
  std::vector<Eigen::MatrixXcd> dipoles;  // one N x N matrix per reservoir
  double gap_tol = 1e-9;
  std::vector<double> gap_multiset;  // every m>n difference, ascending

  int n_levels() const { return static_cast<int>(levels.size()); }
  int n_reservoirs() const { return static_cast<int>(dipoles.size()); }

  // Channel coupling weight for reservoir j on the (upper, lower) pair.
  double weight(int reservoir, int upper, int lower) const {
    return std::norm(dipoles.at(reservoir)(lower, upper));
  }
};

inline SystemSpec validate_system(const Eigen::VectorXd& levels,
                                  const std::vector<Eigen::MatrixXcd>& dipoles,
                                  double gap_tol = 1e-9) {
  const int n = static_cast<int>(levels.size());
  if (n < 2) fail_validation("InconsistentDimensions", "need at least 2 levels");
  if (dipoles.empty()) fail_validation("EmptyCoupling", "no dipole matrix supplied");
  for (const auto& d : dipoles)
    if (d.rows() != n || d.cols() != n)
      fail_validation("InconsistentDimensions", "dipole matrix is not N x N");

  for (int i = 0; i + 1 < n; ++i)
    if (levels[i + 1] - levels[i] <= gap_tol)
      fail_validation("DegenerateSpectrum", "levels " + std::to_string(i) + " and " +
                                                std::to_string(i + 1) + " are within gap_tol");

  SystemSpec spec;
  spec.levels = levels;
  spec.dipoles = dipoles;
  spec.gap_tol = gap_tol;
  for (int m = 1; m < n; ++m)
    for (int l = 0; l < m; ++l) spec.gap_multiset.push_back(levels[m] - levels[l]);
  std::sort(spec.gap_multiset.begin(), spec.gap_multiset.end());
  for (std::size_t i = 0; i + 1 < spec.gap_multiset.size(); ++i)
    if (spec.gap_multiset[i + 1] - spec.gap_multiset[i] <= gap_tol)
      fail_validation("DegenerateGap", "two Bohr frequencies coincide within gap_tol");

  bool any_offdiag = false;
  bool any_diag = false;
  for (const auto& d : dipoles) {
    for (int r = 0; r < n; ++r)
      for (int c = 0; c < n; ++c) {
        if (r == c && std::abs(d(r, c)) > 0) any_diag = true;
        if (r != c && std::abs(d(r, c)) > 0) any_offdiag = true;
      }
  }
  if (!any_offdiag)
    fail_validation("EmptyCoupling", "all off-diagonal dipole entries are zero");
  if (any_diag) log::info("diagonal dipole entries present; they do not enter the dynamics");

  return spec;
}

inline BohrTable bohr_frequencies(const SystemSpec& spec) {
  BohrTable table;
  const int n = spec.n_levels();
  for (int m = 1; m < n; ++m)
    for (int l = 0; l < m; ++l)
      table.entries.push_back({spec.levels[m] - spec.levels[l], m, l});
  std::sort(table.entries.begin(), table.entries.end(),
            [](const BohrEntry& a, const BohrEntry& b) { return a.omega < b.omega; });
  return table;
}

}  // namespace neqsteady
