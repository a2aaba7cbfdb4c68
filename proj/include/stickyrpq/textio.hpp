#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

#include "stickyrpq/homcore.hpp"
#include "stickyrpq/model.hpp"
#include "stickyrpq/rpq.hpp"
#include "stickyrpq/tca.hpp"

namespace stickyrpq {

class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& message, size_t line, size_t column)
      : std::runtime_error("line " + std::to_string(line) + ", column " + std::to_string(column) + ": " + message),
        line_(line),
        column_(column) {}
  size_t line() const { return line_; }
  size_t column() const { return column_; }

 private:
  size_t line_, column_;
};

// Rules as written, multi-head statements kept intact.
std::vector<MultiHeadRule> parse_multihead_ruleset(std::string_view text);
// Rules with multi-head statements normalized to single-head form.
Ruleset parse_ruleset(std::string_view text);
// One fact per statement; `_nK` nulls and `fK(...)` terms declared by a
// `#skolem` table are accepted. Every name in a term position is a constant.
Instance parse_database(std::string_view text);
// Optional `rpq:`, `2rpq:` or `hrpq:` prefix. Without a prefix a query using
// `^` is two-way. With a signature, arities are checked.
Query parse_query(std::string_view text, const Signature* signature = nullptr);
Regex parse_regex(std::string_view text);
// Statements `ans(X) :- E(X,Y), F(Y).`; all heads must agree on arity.
UCQ parse_ucq(std::string_view text);
TCA parse_tca(std::string_view text);

std::string format_rule(const Rule& rule);
std::string format_ruleset(const Ruleset& rules);
// Sorted facts, preceded by the Skolem symbol table when needed.
std::string format_database(const Instance& instance);
std::string format_query(const Query& q);
std::string format_ucq(const UCQ& q);
std::string format_tca(const TCA& m);

std::string read_file(const std::string& path);

}  // namespace stickyrpq
