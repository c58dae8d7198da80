#pragma once

#include "tndipw/errors.hpp"
#include "tndipw/glm.hpp"

#include <concepts>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace tndipw {

/// Columns of the fixed record schema, in CSV order.
enum class Variable : std::uint8_t { c, x, u, y1, y_other, w, h, t };

inline constexpr std::size_t kVariableCount = 8;

std::string_view variable_name(Variable v) noexcept;
/// Throws UnknownVariableError.
Variable parse_variable(std::string_view name);

/// Complete simulated data for one person. All fields are 0/1; h is 0 when the
/// scenario has no health-care-seeking variable.
struct IndividualRecord {
  std::uint8_t c = 0;
  std::uint8_t x = 0;
  std::uint8_t u = 0;
  std::uint8_t y1 = 0;
  std::uint8_t y_other = 0;
  std::uint8_t w = 0;
  std::uint8_t h = 0;
  std::uint8_t t = 0;

  int value(Variable v) const noexcept;
  bool operator==(const IndividualRecord&) const = default;
};

/// Observed-data view of a record: y1 is readable only when t = 1.
class ObservedRecord {
 public:
  ObservedRecord(const IndividualRecord& record, std::size_t source_index);

  /// Throws MaskedOutcomeError for y1 on an untested record.
  int value(Variable v) const;
  bool y1_observed() const noexcept { return record_.t == 1; }
  bool tested() const noexcept { return record_.t == 1; }
  /// Index of the record in the population it was drawn from.
  std::size_t source_index() const noexcept { return source_index_; }

 private:
  IndividualRecord record_;
  std::size_t source_index_;
};

template <class R>
concept RecordLike = requires(const R& r, Variable v) {
  { r.value(v) } -> std::convertible_to<int>;
};

enum class DesignTag { all_tested_plus_controls, proper_tnd, proper_tnd_plus_controls, tested_only };

std::string_view design_tag_name(DesignTag tag) noexcept;
DesignTag parse_design_tag(std::string_view name);

struct StudySample {
  std::vector<ObservedRecord> records;
  DesignTag design = DesignTag::all_tested_plus_controls;
  std::size_t n_tested = 0;
  std::size_t n_controls = 0;
  /// Testing prevalence assumed when weighting the case-control design.
  double q0_assumed = 0.0;
  /// Subset history, e.g. {"t==1"}.
  std::vector<std::string> annotations;

  std::size_t size() const noexcept { return records.size(); }
};

/// Builds a sample from records, counting strata; the tag is the caller's.
StudySample make_sample(std::vector<ObservedRecord> records, DesignTag design, double q0_assumed);

/// A main effect (`second` empty) or a pairwise product.
struct Term {
  Variable first;
  std::optional<Variable> second;

  std::string label() const;
  int value(const RecordLike auto& record) const {
    const int a = record.value(first);
    return second ? a * record.value(*second) : a;
  }
  bool operator==(const Term& other) const;
};

struct Formula {
  Variable outcome = Variable::y1;
  std::vector<Term> terms;
  bool include_intercept = true;

  /// Parses "y1 ~ x + c + w + w:x"; "0" or "-1" drops the intercept.
  static Formula parse(std::string_view text);
  std::string str() const;
  std::vector<std::string> column_labels() const;
  bool has_term(const Term& term) const;
};

struct ModelFrame {
  glm::DesignMatrix design;
  std::vector<double> response;
};

/// Regressor matrix only; the outcome is never read.
template <RecordLike R>
glm::DesignMatrix build_regressors(std::span<const R> records, const Formula& formula) {
  const std::size_t offset = formula.include_intercept ? 1 : 0;
  Eigen::MatrixXd values(static_cast<Eigen::Index>(records.size()),
                         static_cast<Eigen::Index>(formula.terms.size() + offset));
  for (std::size_t i = 0; i < records.size(); ++i) {
    const auto row = static_cast<Eigen::Index>(i);
    if (offset) values(row, 0) = 1.0;
    for (std::size_t j = 0; j < formula.terms.size(); ++j) {
      values(row, static_cast<Eigen::Index>(j + offset)) = formula.terms[j].value(records[i]);
    }
  }
  return {std::move(values), formula.column_labels()};
}

template <RecordLike R>
ModelFrame build_design(std::span<const R> records, const Formula& formula) {
  ModelFrame frame{build_regressors(records, formula), {}};
  frame.response.reserve(records.size());
  for (const auto& r : records) frame.response.push_back(r.value(formula.outcome));
  return frame;
}

/// Throws MaskedOutcomeError if any record's outcome is masked.
ModelFrame build_design(const StudySample& sample, const Formula& formula);
glm::DesignMatrix build_regressors(const StudySample& sample, const Formula& formula);

/// Predicate with a printable description for the subset history.
struct RecordFilter {
  std::function<bool(const ObservedRecord&)> accept;
  std::string description;
};

RecordFilter tested_filter();
RecordFilter tested_symptomatic_filter();
RecordFilter untested_filter();
/// Symptomatic test-positives plus untested controls.
RecordFilter testpos_or_control_filter();
RecordFilter both(RecordFilter a, RecordFilter b);

/// Records satisfying the filter, counts recomputed. Losing all controls turns
/// the tag into proper-tnd (all tested symptomatic) or tested-only.
StudySample subset(const StudySample& sample, const RecordFilter& filter);

}  // namespace tndipw
