#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "statopt/param.hpp"

namespace statopt {

enum class ModelId { NonResponse, Mixture, Regression, Polynomial, Counterexample };
enum class Algorithm { GD, GA, NM, CNM, EM };
enum class Level { Population, Sample };

std::string to_string(ModelId m);
std::string to_string(Algorithm a);
std::string to_string(Level l);
ModelId parse_model(std::string_view s);
Algorithm parse_algorithm(std::string_view s);
Level parse_level(std::string_view s);

// Informative non-response: y[i] is present only when r[i] == 1.
struct NonResponseData {
  std::vector<std::uint8_t> r;
  std::vector<std::optional<double>> y;

  std::size_t size() const { return r.size(); }
};

// Rows are observations.
struct MixtureData {
  Mat x;

  std::size_t size() const { return static_cast<std::size_t>(x.rows()); }
  std::size_t dim() const { return static_cast<std::size_t>(x.cols()); }
};

struct RegressionData {
  Mat x;
  Vec y;
  int p = 1;

  std::size_t size() const { return static_cast<std::size_t>(x.rows()); }
  std::size_t dim() const { return static_cast<std::size_t>(x.cols()); }
};

// f(θ) = ‖θ‖^p/p and f_n(θ) = f(θ) − eps_n ‖θ‖^q/q.
struct PolynomialSpec {
  double p = 4.0;
  double q = 2.0;
  double eps_n = 0.0;
  std::size_t dim = 1;

  void validate() const;
};

// L(θ) = −θ⁴(θ−2)², L_n(θ) = −(θ⁴ − θ²/√n)(θ−2)².
struct CounterexampleSpec {
  std::size_t n = 1;

  void validate() const;
};

using SampleSet =
    std::variant<NonResponseData, MixtureData, RegressionData, PolynomialSpec, CounterexampleSpec>;

// What a population-level objective needs to know about the model.
struct ModelSpec {
  ModelId id = ModelId::Regression;
  std::size_t dim = 1;
  int link_power = 1;   // regression
  double poly_p = 4.0;  // polynomial (population level accepts any p >= 2)
  double poly_q = 2.0;

  void validate() const;
};

ModelId model_of(const SampleSet& data);
ModelSpec spec_of(const SampleSet& data);
std::size_t sample_size(const SampleSet& data);

// (4p−1)!! by exact integer recurrence.
double double_factorial_4p_minus_1(int p);

}  // namespace statopt
