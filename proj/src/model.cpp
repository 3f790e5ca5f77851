#include "pfd/model.hpp"

#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace pfd {

double eval_f(const OutcomeModel& model, const std::vector<double>& x) {
  if (static_cast<int>(x.size()) != model.index.p())
    throw std::invalid_argument("eval_f: assignment length mismatch");
  double s = 0.0;
  for (int j = 0; j < model.index.size(); ++j)
    s += model.beta[j] * phi(model.index.mask(j), x);
  return s;
}

double eval_indicator(const IndicatorModel& model, const std::vector<double>& x) {
  if (static_cast<int>(x.size()) != model.index.p())
    throw std::invalid_argument("eval_indicator: assignment length mismatch");
  std::uint64_t on = 0;
  for (std::size_t i = 0; i < x.size(); ++i)
    if (x[i] > 0) on |= std::uint64_t{1} << i;
  double s = 0.0;
  for (int j = 0; j < model.index.size(); ++j) {
    std::uint64_t m = model.index.mask(j);
    if ((m & on) == m) s += model.alpha[j];
  }
  return s;
}

OutcomeModel alpha_to_beta(const IndicatorModel& m, double sigma) {
  const SubsetIndex& idx = m.index;
  Eigen::VectorXd beta = Eigen::VectorXd::Zero(idx.size());
  for (int s = 0; s < idx.size(); ++s) {
    const std::uint64_t ms = idx.mask(s);
    for (int t = 0; t < idx.size(); ++t) {
      const std::uint64_t mt = idx.mask(t);
      if ((ms & mt) == ms)
        beta[s] += m.alpha[t] / std::pow(2.0, __builtin_popcountll(mt));
    }
  }
  return OutcomeModel{idx, beta, sigma, std::max(beta.norm(), 1e-300)};
}

std::vector<double> assignment_from_bits(std::uint64_t bits, int p) {
  std::vector<double> x(p);
  for (int i = 0; i < p; ++i) x[i] = (bits >> i) & 1 ? 1.0 : -1.0;
  return x;
}

Eigen::VectorXd fourier_transform_bruteforce(const std::vector<double>& f_table,
                                             const SubsetIndex& index) {
  const int p = index.p();
  if (p > 16)
    throw std::invalid_argument("fourier_transform_bruteforce: p > 16");
  const std::uint64_t N = std::uint64_t{1} << p;
  if (f_table.size() != N)
    throw std::invalid_argument("fourier_transform_bruteforce: table size != 2^p");
  Eigen::VectorXd beta = Eigen::VectorXd::Zero(index.size());
  for (std::uint64_t y = 0; y < N; ++y) {
    for (int j = 0; j < index.size(); ++j)
      beta[j] += f_table[y] * phi_bits(index.mask(j), y);
  }
  beta /= static_cast<double>(N);
  return beta;
}

OutcomeModel generate_model(int p, int k, std::uint64_t seed, double sigma,
                            std::optional<double> B_override) {
  SubsetIndex index(p, k);
  Rng rng(seed);
  Eigen::VectorXd beta(index.size());
  for (int j = 0; j < index.size(); ++j) beta[j] = rng.uniform(-1.0, 1.0);
  double B = B_override.value_or(beta.norm());
  return OutcomeModel{index, beta, sigma, B};
}

double observe(const OutcomeModel& model, const std::vector<double>& x, Rng& rng) {
  return eval_f(model, x) + model.sigma * rng.normal();
}

void save_model(const OutcomeModel& model, std::ostream& os) {
  os.precision(17);
  os << "p " << model.index.p() << "\n"
     << "k " << model.index.k() << "\n"
     << "sigma " << model.sigma << "\n"
     << "B " << model.B << "\n";
  for (int j = 0; j < model.index.size(); ++j) {
    auto mem = model.index.members(j);
    if (mem.empty()) {
      os << "-";
    } else {
      for (std::size_t i = 0; i < mem.size(); ++i)
        os << (i ? "," : "") << mem[i];
    }
    os << " " << model.beta[j] << "\n";
  }
}

OutcomeModel load_model(std::istream& is) {
  std::string key;
  int p = 0, k = 0;
  double sigma = 0.0, B = 0.0;
  for (int i = 0; i < 4; ++i) {
    is >> key;
    if (key == "p")
      is >> p;
    else if (key == "k")
      is >> k;
    else if (key == "sigma")
      is >> sigma;
    else if (key == "B")
      is >> B;
    else
      throw std::invalid_argument("load_model: unexpected header key " + key);
  }
  SubsetIndex index(p, k);
  Eigen::VectorXd beta = Eigen::VectorXd::Zero(index.size());
  std::string subset;
  double value;
  int seen = 0;
  while (is >> subset >> value) {
    std::uint64_t mask = 0;
    if (subset != "-") {
      std::stringstream ss(subset);
      std::string tok;
      while (std::getline(ss, tok, ',')) {
        int v = std::stoi(tok);
        if (v < 1 || v > p)
          throw std::invalid_argument("load_model: member out of range");
        mask |= std::uint64_t{1} << (v - 1);
      }
    }
    beta[index.column_of(mask)] = value;
    ++seen;
  }
  if (seen != index.size())
    throw std::invalid_argument("load_model: coefficient count mismatch");
  return OutcomeModel{index, beta, sigma, B};
}

void save_model_file(const OutcomeModel& model, const std::string& path) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot open for writing: " + path);
  save_model(model, os);
}

OutcomeModel load_model_file(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot open: " + path);
  return load_model(is);
}

}  // namespace pfd
