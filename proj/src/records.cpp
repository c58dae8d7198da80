#include "tndipw/records.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <array>
#include <cctype>

namespace tndipw {

namespace {

constexpr std::array<std::string_view, kVariableCount> kNames{"c", "x", "u", "y1", "y_other", "w", "h", "t"};

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> parts;
  std::size_t start = 0;
  for (std::size_t i = 0; i <= s.size(); ++i) {
    if (i == s.size() || s[i] == sep) {
      parts.push_back(trim(s.substr(start, i - start)));
      start = i + 1;
    }
  }
  return parts;
}

bool all_tested_symptomatic(const std::vector<ObservedRecord>& records) {
  return std::all_of(records.begin(), records.end(),
                     [](const ObservedRecord& r) { return !r.tested() || r.value(Variable::w) == 1; });
}

}  // namespace

std::string_view variable_name(Variable v) noexcept { return kNames[static_cast<std::size_t>(v)]; }

Variable parse_variable(std::string_view name) {
  const auto it = std::find(kNames.begin(), kNames.end(), trim(name));
  if (it == kNames.end()) throw UnknownVariableError(fmt::format("unknown variable '{}'", name));
  return static_cast<Variable>(it - kNames.begin());
}

int IndividualRecord::value(Variable v) const noexcept {
  switch (v) {
    case Variable::c: return c;
    case Variable::x: return x;
    case Variable::u: return u;
    case Variable::y1: return y1;
    case Variable::y_other: return y_other;
    case Variable::w: return w;
    case Variable::h: return h;
    case Variable::t: return t;
  }
  return 0;
}

ObservedRecord::ObservedRecord(const IndividualRecord& record, std::size_t source_index)
    : record_(record), source_index_(source_index) {
  if (record_.t == 0) record_.y1 = 0;
}

int ObservedRecord::value(Variable v) const {
  if (v == Variable::y1 && !y1_observed()) {
    throw MaskedOutcomeError(fmt::format("y1 is masked for untested record {}", source_index_));
  }
  return record_.value(v);
}

std::string_view design_tag_name(DesignTag tag) noexcept {
  switch (tag) {
    case DesignTag::all_tested_plus_controls: return "all-tested-plus-controls";
    case DesignTag::proper_tnd: return "proper-tnd";
    case DesignTag::proper_tnd_plus_controls: return "proper-tnd-plus-controls";
    case DesignTag::tested_only: return "tested-only";
  }
  return "?";
}

DesignTag parse_design_tag(std::string_view name) {
  for (const auto tag : {DesignTag::all_tested_plus_controls, DesignTag::proper_tnd,
                         DesignTag::proper_tnd_plus_controls, DesignTag::tested_only}) {
    if (design_tag_name(tag) == name) return tag;
  }
  throw ConfigError(fmt::format("unknown design tag '{}'", name));
}

StudySample make_sample(std::vector<ObservedRecord> records, DesignTag design, double q0_assumed) {
  StudySample s;
  s.n_tested = static_cast<std::size_t>(
      std::count_if(records.begin(), records.end(), [](const ObservedRecord& r) { return r.tested(); }));
  s.n_controls = records.size() - s.n_tested;
  s.records = std::move(records);
  s.design = design;
  s.q0_assumed = q0_assumed;
  return s;
}

std::string Term::label() const {
  std::string out(variable_name(first));
  if (second) {
    out += ':';
    out += variable_name(*second);
  }
  return out;
}

bool Term::operator==(const Term& other) const {
  if (!second && !other.second) return first == other.first;
  if (!second || !other.second) return false;
  return (first == other.first && *second == *other.second) ||
         (first == *other.second && *second == other.first);
}

Formula Formula::parse(std::string_view text) {
  const auto tilde = text.find('~');
  if (tilde == std::string_view::npos) throw ConfigError(fmt::format("formula '{}' has no '~'", text));
  Formula f;
  f.outcome = parse_variable(text.substr(0, tilde));
  std::string rhs;
  for (const char ch : text.substr(tilde + 1)) {
    if (ch != ' ' && ch != '\t') rhs += ch;
  }
  // "-1" is sugar for "+ 0".
  for (std::size_t pos = rhs.find("-"); pos != std::string::npos; pos = rhs.find("-")) rhs.replace(pos, 1, "+0*");
  for (const auto raw : split(rhs, '+')) {
    std::string_view part = raw;
    if (part.empty()) continue;
    if (part == "1") {
      f.include_intercept = true;
      continue;
    }
    if (part == "0" || part == "0*1") {
      f.include_intercept = false;
      continue;
    }
    const auto factors = split(part, ':');
    if (factors.size() > 2) throw ConfigError(fmt::format("term '{}' has more than two factors", part));
    Term term{parse_variable(factors[0]), std::nullopt};
    if (factors.size() == 2) term.second = parse_variable(factors[1]);
    if (term.first == f.outcome || (term.second && *term.second == f.outcome)) {
      throw ConfigError(fmt::format("term '{}' uses the outcome", part));
    }
    if (f.has_term(term)) throw ConfigError(fmt::format("duplicate term '{}'", part));
    f.terms.push_back(term);
  }
  return f;
}

std::string Formula::str() const {
  std::string out(variable_name(outcome));
  out += " ~ ";
  out += include_intercept ? "1" : "0";
  for (const auto& t : terms) out += " + " + t.label();
  return out;
}

std::vector<std::string> Formula::column_labels() const {
  std::vector<std::string> labels;
  if (include_intercept) labels.emplace_back("(Intercept)");
  for (const auto& t : terms) labels.push_back(t.label());
  return labels;
}

bool Formula::has_term(const Term& term) const {
  return std::find(terms.begin(), terms.end(), term) != terms.end();
}

ModelFrame build_design(const StudySample& sample, const Formula& formula) {
  return build_design(std::span<const ObservedRecord>(sample.records), formula);
}

glm::DesignMatrix build_regressors(const StudySample& sample, const Formula& formula) {
  return build_regressors(std::span<const ObservedRecord>(sample.records), formula);
}

RecordFilter tested_filter() {
  return {[](const ObservedRecord& r) { return r.tested(); }, "t==1"};
}

RecordFilter tested_symptomatic_filter() {
  return {[](const ObservedRecord& r) { return r.tested() && r.value(Variable::w) == 1; }, "t==1&w==1"};
}

RecordFilter untested_filter() {
  return {[](const ObservedRecord& r) { return !r.tested(); }, "t==0"};
}

RecordFilter testpos_or_control_filter() {
  return {[](const ObservedRecord& r) {
            if (!r.tested()) return true;
            return r.value(Variable::w) == 1 && r.value(Variable::y1) == 1;
          },
          "(t==1&w==1&y1==1)|t==0"};
}

RecordFilter both(RecordFilter a, RecordFilter b) {
  auto description = "(" + a.description + ")&(" + b.description + ")";
  return {[a = std::move(a.accept), b = std::move(b.accept)](const ObservedRecord& r) { return a(r) && b(r); },
          std::move(description)};
}

StudySample subset(const StudySample& sample, const RecordFilter& filter) {
  std::vector<ObservedRecord> kept;
  for (const auto& r : sample.records) {
    if (filter.accept(r)) kept.push_back(r);
  }
  DesignTag tag = sample.design;
  const bool symptomatic = all_tested_symptomatic(kept);
  const bool controls = std::any_of(kept.begin(), kept.end(), [](const ObservedRecord& r) { return !r.tested(); });
  if (!controls) {
    tag = symptomatic ? DesignTag::proper_tnd : DesignTag::tested_only;
  } else if (symptomatic && tag == DesignTag::all_tested_plus_controls) {
    tag = DesignTag::proper_tnd_plus_controls;
  }
  StudySample out = make_sample(std::move(kept), tag, sample.q0_assumed);
  out.annotations = sample.annotations;
  out.annotations.push_back(filter.description);
  return out;
}

}  // namespace tndipw
