#include "lrca/cli/cli.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <string_view>

namespace lrca::cli {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

double parse_value(std::string_view s, const std::string& context) {
  s = trim(s);
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  double v = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || res.ec != std::errc() || res.ptr != s.data() + s.size() || !std::isfinite(v)) {
    throw UsageError("restriction: bad number '" + std::string(s) + "' in '" + context + "'");
  }
  return v;
}

bool is_name(std::string_view s) {
  if (s.empty() || std::isdigit(static_cast<unsigned char>(s.front()))) return false;
  return std::all_of(s.begin(), s.end(), [](char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '.' || c == '(' || c == ')';
  });
}

using Resolver = std::function<Eigen::Index(const std::string&)>;

RestrictionSpec parse_with(const std::string& text, Eigen::Index dim, const Resolver& resolve) {
  const std::string_view all = trim(text);
  if (all.empty()) throw UsageError("restriction: empty specification");
  RestrictionSpec spec;

  const bool linear = all.find('*') != std::string_view::npos ||
                      (all.find(',') == std::string_view::npos &&
                       trim(all.substr(0, all.find('='))).find_first_of("+-") != std::string_view::npos);
  if (!linear) {
    std::size_t start = 0;
    while (start <= all.size()) {
      const std::size_t comma = all.find(',', start);
      const std::string_view item = trim(all.substr(start, comma == all.npos ? all.npos : comma - start));
      const std::size_t eq = item.find('=');
      if (eq == item.npos || item.find('=', eq + 1) != item.npos) {
        throw UsageError("restriction: expected name=value, got '" + std::string(item) + "'");
      }
      const std::string name(trim(item.substr(0, eq)));
      if (!is_name(name)) throw UsageError("restriction: bad parameter name '" + name + "'");
      const Eigen::Index idx = resolve(name);
      if (spec.fixed.count(idx)) throw UsageError("restriction: parameter '" + name + "' fixed twice");
      spec.fixed[idx] = parse_value(item.substr(eq + 1), std::string(item));
      if (comma == all.npos) break;
      start = comma + 1;
    }
    return spec;
  }

  const std::size_t eq = all.find('=');
  if (eq == all.npos || all.find('=', eq + 1) != all.npos) {
    throw UsageError("restriction: a linear restriction needs exactly one '='");
  }
  if (all.find(',') != all.npos) {
    throw UsageError("restriction: only a single linear restriction is supported");
  }
  Vector coef = Vector::Zero(dim);
  const std::string_view lhs = trim(all.substr(0, eq));
  std::size_t pos = 0;
  bool any = false;
  while (pos < lhs.size()) {
    double sign = 1.0;
    while (pos < lhs.size() && (lhs[pos] == '+' || lhs[pos] == '-' || std::isspace(static_cast<unsigned char>(lhs[pos])))) {
      if (lhs[pos] == '-') sign = -sign;
      ++pos;
    }
    std::size_t end = pos;
    // A term ends at the next sign that is not part of an exponent.
    while (end < lhs.size()) {
      const char c = lhs[end];
      if ((c == '+' || c == '-') && end > pos && lhs[end - 1] != 'e' && lhs[end - 1] != 'E' && lhs[end - 1] != '*') break;
      if ((c == '+' || c == '-') && end > pos && (lhs[end - 1] == 'e' || lhs[end - 1] == 'E')) {
        // "1e-3*x" is an exponent, but "alpha1e-x" is not a legal term anyway.
        const std::string_view before = lhs.substr(pos, end - pos);
        if (before.find('*') != before.npos || !std::isdigit(static_cast<unsigned char>(before.front()))) break;
      }
      ++end;
    }
    const std::string_view term = trim(lhs.substr(pos, end - pos));
    if (term.empty()) throw UsageError("restriction: empty term in '" + std::string(lhs) + "'");
    const std::size_t star = term.find('*');
    double c = 1.0;
    std::string name;
    if (star == term.npos) {
      name = std::string(term);
    } else {
      c = parse_value(term.substr(0, star), std::string(term));
      name = std::string(trim(term.substr(star + 1)));
    }
    if (!is_name(name)) throw UsageError("restriction: bad parameter name '" + name + "'");
    coef[resolve(name)] += sign * c;
    any = true;
    pos = end;
  }
  if (!any) throw UsageError("restriction: no terms before '='");
  if (coef.cwiseAbs().maxCoeff() == 0.0) throw UsageError("restriction: all coefficients cancel");
  spec.coefficients = coef;
  spec.target = parse_value(all.substr(eq + 1), std::string(all));
  return spec;
}

}  // namespace

Restriction RestrictionSpec::to_restriction(Eigen::Index dim) const {
  if (coefficients) {
    if (coefficients->size() != dim) throw UsageError("restriction: dimension mismatch");
    Matrix r(1, dim);
    r.row(0) = coefficients->transpose();
    return Restriction::linear(r, Vector::Constant(1, target));
  }
  std::vector<Eigen::Index> idx;
  Vector values(static_cast<Eigen::Index>(fixed.size()));
  for (const auto& [i, v] : fixed) {
    values[static_cast<Eigen::Index>(idx.size())] = v;
    idx.push_back(i);
  }
  return Restriction::fixed_components(dim, idx, values);
}

RestrictionSpec parse_restriction(const std::string& text, const std::vector<std::string>& names) {
  const auto resolve = [&names](const std::string& name) -> Eigen::Index {
    const auto it = std::find(names.begin(), names.end(), name);
    if (it == names.end()) throw UsageError("restriction: unknown parameter '" + name + "'");
    return static_cast<Eigen::Index>(it - names.begin());
  };
  return parse_with(text, static_cast<Eigen::Index>(names.size()), resolve);
}

RestrictionSpec parse_restriction(const std::string& text, const DataModel& model) {
  return parse_with(text, static_cast<Eigen::Index>(model.names.size()),
                    [&model](const std::string& name) { return model.index_of(name); });
}

}  // namespace lrca::cli
