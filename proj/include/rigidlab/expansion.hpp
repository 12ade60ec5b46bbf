#pragma once

// Average log-expansion of d-planes under mu^{*N}, computed by exhaustive
// word enumeration or Monte Carlo, and grid scans for the uniform expansion
// and uniform gaps certificates.

#include <cstdint>
#include <string>
#include <vector>

#include "rigidlab/system.hpp"
#include "rigidlab/walk_measure.hpp"

namespace rigidlab::expansion {

using dynamics::Mat;
using dynamics::Vec;

struct PlaneSpec {
  std::vector<double> base_point;
  Mat basis;    // dim x d, orthonormal columns
  Vec plucker;  // unit vector in Lambda^d, indexed by sorted d-subsets

  std::size_t dim() const { return static_cast<std::size_t>(basis.rows()); }
  std::size_t d() const { return static_cast<std::size_t>(basis.cols()); }

  // Orthonormalizes the spanning columns. Throws InvalidArgument when they
  // are dependent or d is outside 1..dim.
  static PlaneSpec from_vectors(std::vector<double> base_point, const Mat& spanning);
  // Line at angle theta in a 2-dimensional tangent space.
  static PlaneSpec from_angle(std::vector<double> base_point, double theta);
};

// Plucker coordinates (all d x d minors, lexicographic subsets).
Vec plucker_vector(const Mat& spanning);

// log(||Lambda^d(J) xi|| / ||xi||) for xi spanned by the columns of V; the
// ratio is invariant under rescaling of V.
double log_expansion(const Mat& jacobian, const Mat& spanning);

enum class Mode { Exact, MonteCarlo };
std::string to_string(Mode m);

struct SigmaOptions {
  Mode mode = Mode::Exact;
  std::size_t samples = 10000;
  std::uint64_t seed = 1;
  std::size_t word_budget = std::size_t{1} << 20;
};

struct SigmaEstimate {
  double value = 0.0;
  double std_error = 0.0;    // zero in exact mode
  std::size_t count = 0;     // words enumerated or samples drawn
  double weight_total = 0.0; // exact mode: sum of word probabilities
};

// Throws BudgetExceeded, NonInvertibleJacobian, SpaceMismatch.
SigmaEstimate sigma(const walk::WalkMeasure& mu, std::size_t N, const PlaneSpec& plane,
                    const SigmaOptions& opt = {});

// Planes to scan: every base point is paired with every basis. Nested pairs
// for the gaps scan use basis columns 0..d-1 as P0 and 0..d as P1.
struct PlaneGrid {
  std::vector<std::vector<double>> base_points;
  std::vector<Mat> bases;
  std::vector<std::string> labels;
  double angular_spacing = 0.0;  // set for angular grids (radians)
};

// Lines at angles k*pi/count in a 2-dimensional space.
PlaneGrid angular_grid(std::vector<std::vector<double>> base_points, std::size_t count);
// For the gaps scan: [v(theta), v(theta + pi/2)] at angles k*pi/count.
PlaneGrid angular_flag_grid(std::vector<std::vector<double>> base_points, std::size_t count);
// Haar-random frames with `columns` columns in dimension dim.
PlaneGrid random_grid(std::vector<std::vector<double>> base_points, std::size_t dim, std::size_t columns,
                      std::size_t count, std::uint64_t seed);

struct ExpansionRow {
  std::size_t plane_id = 0;
  std::string label;
  double sigma = 0.0;  // for gaps: delta * (sigma(P1) - sigma(P0))
  double std_error = 0.0;
};

struct ExpansionReport {
  std::string kind;  // "expansion" or "gaps"
  std::size_t N = 0;
  std::size_t d = 0;
  int delta = 0;  // gaps only
  Mode mode = Mode::Exact;
  double min_value = 0.0;
  std::size_t argmin = 0;
  std::vector<ExpansionRow> rows;
  double margin = 0.0;
  bool certificate = false;  // min_value > margin + 1e-12
  // Sampled minimum only; the rigorous flag is set when a Lipschitz bound in
  // the angle covers the grid spacing (constant Jacobians, dim 2, d 1).
  bool rigorous = false;
  double lipschitz = 0.0;
  std::string note;
  double weight_total = 0.0;  // exact mode, first plane
};

struct ScanOptions {
  SigmaOptions sigma;
  double margin = 0.0;
};

ExpansionReport uniform_expansion_scan(const walk::WalkMeasure& mu, std::size_t N, std::size_t d,
                                       const PlaneGrid& grid, const ScanOptions& opt = {});

// delta in {+1, -1}. Throws InvalidArgument on a grid whose frames do not
// have d+1 columns.
ExpansionReport uniform_gaps_scan(const walk::WalkMeasure& mu, std::size_t N, std::size_t d, int delta,
                                  const PlaneGrid& grid, const ScanOptions& opt = {});

// Sum over words of p(word) * cond(J_word): bounds |d sigma / d theta| for
// lines in dimension 2 under constant Jacobians.
double angular_lipschitz_bound(const walk::WalkMeasure& mu, std::size_t N,
                               std::size_t word_budget = std::size_t{1} << 20);

}  // namespace rigidlab::expansion
