#pragma once

#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "sdv/datetime.hpp"
#include "sdv/graph.hpp"

namespace sdv {

/// One builtin application inside a rule antecedent:
///   (?a ?b) func:concat ?out        list subject, object receives the result
///   ?x math:greaterThan 3           plain subject, object is a second input
struct BuiltinAtom {
  TermId builtin = 0;        // builtin IRI
  std::vector<TermId> args;  // subject-side arguments (one entry for a plain subject)
  TermId object = 0;         // result variable/value (functions) or input (filters)
  size_t ordinal = 0;        // position within the antecedent, for messages
};

enum class BuiltinKind { Function, Filter };

struct BuiltinDef {
  BuiltinKind kind;
  size_t min_args = 1;
  size_t max_args = 1;
  // Function: args -> result, nullopt on unusable input (recorded as warning)
  std::function<std::optional<Term>(std::span<const Term>)> fn;
  // Filter: all inputs (args + object) -> pass/fail; nullopt = unusable input
  std::function<std::optional<bool>(std::span<const Term>)> pred;
};

namespace detail {

inline std::optional<Term> datetime_field(std::span<const Term> args, int DateTime::*field) {
  const Term& t = args[0];
  if (!t.is_literal() || t.datatype != xsd::dateTime_) return std::nullopt;
  auto dt = parse_datetime(t.value);
  if (!dt) return std::nullopt;
  return Term::integer((*dt).*field);
}

inline std::optional<bool> numeric_pred(std::span<const Term> in,
                                        bool (*cmp)(double, double)) {
  auto a = numeric_value(in[0]);
  auto b = numeric_value(in[1]);
  if (!a || !b) return std::nullopt;
  return cmp(*a, *b);
}

} // namespace detail

/// Registered builtins. The date extractors follow the RIF datetime functions
/// (field of the value as written, no timezone shifting); the comparison
/// entries act as filters. Extend here when a rule set needs more.
class BuiltinRegistry {
public:
  static const BuiltinDef* find(std::string_view iri) {
    const auto& m = instance().defs_;
    auto it = m.find(std::string(iri));
    return it == m.end() ? nullptr : &it->second;
  }

  static bool is_builtin_iri(std::string_view iri) { return find(iri) != nullptr; }

private:
  BuiltinRegistry() {
    auto func = [](std::string_view local) { return std::string(ns::rif_func) + std::string(local); };
    auto math = [](std::string_view local) { return std::string(ns::swap_math) + std::string(local); };
    auto log = [](std::string_view local) { return std::string(ns::swap_log) + std::string(local); };

    defs_[func("year-from-dateTime")] = {BuiltinKind::Function, 1, 1,
        [](std::span<const Term> a) {
          const Term& t = a[0];
          if (!t.is_literal() || t.datatype != xsd::dateTime_) return std::optional<Term>{};
          auto dt = parse_datetime(t.value);
          if (!dt) return std::optional<Term>{};
          return std::optional<Term>(Term::integer(dt->year));
        }, {}};
    defs_[func("month-from-dateTime")] = {BuiltinKind::Function, 1, 1,
        [](std::span<const Term> a) { return detail::datetime_field(a, &DateTime::month); }, {}};
    defs_[func("day-from-dateTime")] = {BuiltinKind::Function, 1, 1,
        [](std::span<const Term> a) { return detail::datetime_field(a, &DateTime::day); }, {}};
    defs_[func("concat")] = {BuiltinKind::Function, 1, 16,
        [](std::span<const Term> a) -> std::optional<Term> {
          std::string out;
          for (const Term& t : a) {
            if (!t.is_literal()) return std::nullopt;
            out += t.value;
          }
          return Term::literal(std::move(out));
        }, {}};

    defs_[math("greaterThan")] = {BuiltinKind::Filter, 1, 1, {},
        [](std::span<const Term> in) { return detail::numeric_pred(in, [](double a, double b) { return a > b; }); }};
    defs_[math("lessThan")] = {BuiltinKind::Filter, 1, 1, {},
        [](std::span<const Term> in) { return detail::numeric_pred(in, [](double a, double b) { return a < b; }); }};
    defs_[math("equalTo")] = {BuiltinKind::Filter, 1, 1, {},
        [](std::span<const Term> in) { return detail::numeric_pred(in, [](double a, double b) { return a == b; }); }};

    defs_[log("equalTo")] = {BuiltinKind::Filter, 1, 1, {},
        [](std::span<const Term> in) -> std::optional<bool> { return in[0] == in[1]; }};
    defs_[log("notEqualTo")] = {BuiltinKind::Filter, 1, 1, {},
        [](std::span<const Term> in) -> std::optional<bool> { return !(in[0] == in[1]); }};
  }

  static const BuiltinRegistry& instance() {
    static BuiltinRegistry r;
    return r;
  }

  std::map<std::string, BuiltinDef> defs_;
};

/// Outcome of one builtin evaluation, as recorded in proof steps.
struct BuiltinEval {
  std::vector<Term> inputs;
  std::optional<Term> output; // functions only
  std::string warning;        // non-empty when the atom yielded nothing
};

/// Evaluates a builtin atom under a binding. Returns the (possibly extended)
/// binding when the atom fires, nullopt when it yields nothing. Throws
/// EvalError when an input argument is unbound. Callers in hot loops pass the
/// pre-resolved definition.
inline std::optional<Binding> eval_builtin(const BuiltinAtom& atom, const Binding& b,
                                           BuiltinEval* record = nullptr,
                                           const BuiltinDef* def = nullptr) {
  const Term& biri = TermPool::term_ref(atom.builtin);
  if (!def) def = BuiltinRegistry::find(biri.value);
  if (!def) throw EvalError("unknown builtin " + biri.value);

  auto resolve = [&](TermId id) -> const Term& {
    TermId r = substitute(id, b);
    if (is_variable(r))
      throw EvalError("builtin input ?" + TermPool::term_ref(r).value + " not bound",
                      biri.value);
    return TermPool::term_ref(r);
  };

  std::vector<Term> inputs;
  for (TermId a : atom.args) inputs.push_back(resolve(a));

  if (def->kind == BuiltinKind::Filter) {
    inputs.push_back(resolve(atom.object));
    if (record) record->inputs = inputs;
    auto pass = def->pred(inputs);
    if (!pass) {
      if (record) record->warning = "unusable input for " + biri.value;
      return std::nullopt;
    }
    return *pass ? std::optional<Binding>(b) : std::nullopt;
  }

  if (record) record->inputs = inputs;
  std::optional<Term> out = def->fn(inputs);
  if (!out) {
    if (record) record->warning = "unusable input for " + biri.value;
    return std::nullopt;
  }
  if (record) record->output = out;
  TermId out_id = TermPool::intern(*out);
  TermId obj = substitute(atom.object, b);
  if (is_variable(obj)) {
    Binding ext = b;
    ext.bind(obj, out_id);
    return ext;
  }
  return obj == out_id ? std::optional<Binding>(b) : std::nullopt;
}

} // namespace sdv
