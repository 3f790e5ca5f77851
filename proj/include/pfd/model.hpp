#pragma once

#include <Eigen/Core>
#include <iosfwd>
#include <optional>
#include <string>

#include "pfd/rng.hpp"
#include "pfd/subset_index.hpp"

namespace pfd {

/// Bounded-degree outcome model in the parity basis: f(x) = sum_S beta_S phi_S(x),
/// observed with Gaussian noise of standard deviation sigma. B bounds ||beta||_2.
struct OutcomeModel {
  SubsetIndex index;
  Eigen::VectorXd beta;
  double sigma = 1.0;
  double B = 1.0;
};

/// Same function class in the indicator basis: sum_S alpha_S * 1{x_i = +1 for all i in S}.
struct IndicatorModel {
  SubsetIndex index;
  Eigen::VectorXd alpha;
};

double eval_f(const OutcomeModel& model, const std::vector<double>& x);
double eval_indicator(const IndicatorModel& model, const std::vector<double>& x);

/// Basis change: beta_S = sum over indexed T >= S of alpha_T / 2^|T|.
OutcomeModel alpha_to_beta(const IndicatorModel& m, double sigma = 0.0);

/// Exact parity-basis coefficients of an explicit truth table (p <= 16).
///
/// f_table is indexed by the p-bit integer encoding of x: bit i gives
/// coordinate i+1, a clear bit meaning -1 and a set bit meaning +1.
Eigen::VectorXd fourier_transform_bruteforce(const std::vector<double>& f_table,
                                             const SubsetIndex& index);

/// Assignment vector for a truth-table row index, in the encoding above.
std::vector<double> assignment_from_bits(std::uint64_t bits, int p);

/// Coefficients i.i.d. uniform on (-1, 1); deterministic given the seed.
/// B defaults to ||beta||_2 of the draw unless an override is supplied.
OutcomeModel generate_model(int p, int k, std::uint64_t seed, double sigma = 1.0,
                            std::optional<double> B_override = std::nullopt);

/// Noisy observation y = f(x) + Normal(0, sigma^2).
double observe(const OutcomeModel& model, const std::vector<double>& x, Rng& rng);

void save_model(const OutcomeModel& model, std::ostream& os);
OutcomeModel load_model(std::istream& is);
void save_model_file(const OutcomeModel& model, const std::string& path);
OutcomeModel load_model_file(const std::string& path);

}  // namespace pfd
