#include "stickyrpq/textio.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>

#include "stickyrpq/sticky.hpp"

namespace stickyrpq {

namespace {

struct Token {
  enum class Kind { Name, Punct, String, End };
  Kind kind = Kind::End;
  std::string text;
  size_t line = 1, column = 1;
};

bool name_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; }

std::vector<Token> lex(std::string_view text) {
  std::vector<Token> out;
  size_t line = 1, col = 1, i = 0;
  auto advance = [&](size_t n) {
    for (size_t k = 0; k < n; ++k) {
      if (text[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
      ++i;
    }
  };
  while (i < text.size()) {
    char c = text[i];
    if (std::isspace(static_cast<unsigned char>(c))) {
      advance(1);
      continue;
    }
    if (c == '%') {
      while (i < text.size() && text[i] != '\n') advance(1);
      continue;
    }
    Token t;
    t.line = line;
    t.column = col;
    if (name_char(c)) {
      size_t j = i;
      while (j < text.size() && name_char(text[j])) ++j;
      t.kind = Token::Kind::Name;
      t.text = std::string(text.substr(i, j - i));
      advance(j - i);
    } else if (c == '"') {
      std::string s;
      advance(1);
      while (i < text.size() && text[i] != '"') {
        if (text[i] == '\\' && i + 1 < text.size()) advance(1);
        s += text[i];
        advance(1);
      }
      if (i >= text.size()) throw ParseError("unterminated string", t.line, t.column);
      advance(1);
      t.kind = Token::Kind::String;
      t.text = std::move(s);
    } else {
      static const char* two[] = {"->", ":-", "==", "+=", "-="};
      t.kind = Token::Kind::Punct;
      t.text = std::string(1, c);
      for (const char* op : two) {
        if (text.substr(i, 2) == op) t.text = op;
      }
      if (t.text.size() == 1 && std::string_view("(),.:^/|*+?[]-#").find(c) == std::string_view::npos) {
        throw ParseError(std::string("unexpected character '") + c + "'", line, col);
      }
      advance(t.text.size());
    }
    out.push_back(std::move(t));
  }
  Token end;
  end.line = line;
  end.column = col;
  out.push_back(end);
  return out;
}

enum class TermContext { Rule, Data };

class Parser {
 public:
  explicit Parser(std::string_view text) : tokens_(lex(text)) {}

  const Token& peek(size_t k = 0) const { return tokens_[std::min(pos_ + k, tokens_.size() - 1)]; }
  bool at_end() const { return peek().kind == Token::Kind::End; }
  bool is(std::string_view p) const { return peek().kind == Token::Kind::Punct && peek().text == p; }
  bool is_name(std::string_view n) const { return peek().kind == Token::Kind::Name && peek().text == n; }

  [[noreturn]] void fail(const std::string& message) const {
    const Token& t = peek();
    throw ParseError(message + (t.kind == Token::Kind::End ? " at end of input" : " near '" + t.text + "'"), t.line,
                     t.column);
  }

  Token take() { return tokens_[pos_ < tokens_.size() - 1 ? pos_++ : pos_]; }

  void expect(std::string_view p) {
    if (!is(p)) fail("expected '" + std::string(p) + "'");
    take();
  }

  bool accept(std::string_view p) {
    if (!is(p)) return false;
    take();
    return true;
  }

  std::string name(const char* what) {
    if (peek().kind != Token::Kind::Name) fail(std::string("expected ") + what);
    return take().text;
  }

  void keyword(std::string_view k) {
    if (!is_name(k)) fail("expected '" + std::string(k) + "'");
    take();
  }

  Term term(TermContext ctx) {
    const Token& t = peek();
    std::string n = name("a term");
    if (n.size() > 2 && n[0] == '_' && n[1] == 'n' &&
        std::all_of(n.begin() + 2, n.end(), [](char c) { return std::isdigit(static_cast<unsigned char>(c)); })) {
      return Term::null(std::stoull(n.substr(2)));
    }
    if (is("(")) {
      if (!skolem_ || n.size() < 2 || n[0] != 'f') throw ParseError("unexpected '(' after term " + n, t.line, t.column);
      auto it = skolem_->find(n);
      if (it == skolem_->end()) throw ParseError("undeclared Skolem symbol " + n, t.line, t.column);
      take();
      std::vector<Term> args;
      if (!is(")")) {
        do {
          args.push_back(term(ctx));
        } while (accept(","));
      }
      expect(")");
      if (args.size() != skolem_symbol(it->second).arity) {
        throw ParseError("wrong number of arguments for " + n, t.line, t.column);
      }
      return Term::functional(it->second, std::move(args));
    }
    if (n[0] == '_') throw ParseError("names may not start with '_': " + n, t.line, t.column);
    if (ctx == TermContext::Rule && std::isupper(static_cast<unsigned char>(n[0]))) return Term::variable(n);
    return Term::constant(n);
  }

  Atom atom(TermContext ctx) {
    const Token& t = peek();
    std::string p = name("a predicate name");
    if (p[0] == '_') throw ParseError("predicate names may not start with '_'", t.line, t.column);
    Atom a{Predicate(p), {}};
    expect("(");
    if (!is(")")) {
      do {
        a.args.push_back(term(ctx));
      } while (accept(","));
    }
    expect(")");
    try {
      signature_.declare(a);
    } catch (const ModelError& e) {
      throw ParseError(e.what(), t.line, t.column);
    }
    return a;
  }

  std::vector<Atom> atoms(TermContext ctx) {
    std::vector<Atom> out{atom(ctx)};
    while (accept(",")) out.push_back(atom(ctx));
    return out;
  }

  void set_skolem_table(const std::map<std::string, uint32_t>* table) { skolem_ = table; }
  Signature& signature() { return signature_; }

 private:
  std::vector<Token> tokens_;
  size_t pos_ = 0;
  Signature signature_;
  const std::map<std::string, uint32_t>* skolem_ = nullptr;
};

}  // namespace

std::vector<MultiHeadRule> parse_multihead_ruleset(std::string_view text) {
  Parser p(text);
  std::vector<MultiHeadRule> out;
  while (!p.at_end()) {
    const Token start = p.peek();
    MultiHeadRule r;
    r.body = p.atoms(TermContext::Rule);
    p.expect("->");
    // An atom named `exists` is followed by '(' rather than a variable.
    if (p.is_name("exists") && p.peek(1).kind == Token::Kind::Name) {
      p.take();
      do {
        Term v = p.term(TermContext::Rule);
        if (!v.is_variable()) p.fail("existential must be a variable");
        r.existentials.push_back(v);
      } while (p.accept(","));
      p.expect(".");
    }
    r.heads = p.atoms(TermContext::Rule);
    p.expect(".");
    TermSet body_vars = terms_of(r.body);
    TermSet declared(r.existentials.begin(), r.existentials.end());
    for (Term z : r.existentials) {
      if (body_vars.contains(z)) {
        throw ParseError("existential variable " + to_string(z) + " occurs in the body", start.line, start.column);
      }
    }
    for (const Atom& h : r.heads) {
      for (Term t : h.args) {
        if (t.is_variable() && !body_vars.contains(t) && !declared.contains(t)) {
          throw ParseError("head variable " + to_string(t) + " is neither in the body nor existential", start.line,
                           start.column);
        }
      }
    }
    out.push_back(std::move(r));
  }
  return out;
}

Ruleset parse_ruleset(std::string_view text) {
  auto rules = parse_multihead_ruleset(text);
  Signature sig;
  for (const MultiHeadRule& r : rules) {
    for (const Atom& a : r.body) sig.declare(a);
    for (const Atom& a : r.heads) sig.declare(a);
  }
  return to_single_head(rules, sig);
}

namespace {

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    if (c == '"' || c == '\\') out += '\\';
    out += c;
  }
  return out;
}

// Extracts `#skolem` lines (blanking them) into a file-local symbol table.
std::map<std::string, uint32_t> take_skolem_table(std::string& text) {
  std::map<std::string, uint32_t> table;
  size_t line_start = 0, line_no = 1;
  while (line_start < text.size()) {
    size_t end = text.find('\n', line_start);
    if (end == std::string::npos) end = text.size();
    std::string_view line(text.data() + line_start, end - line_start);
    size_t first = line.find_first_not_of(" \t");
    if (first != std::string_view::npos && line.substr(first).starts_with("#skolem")) {
      Parser p(line.substr(first + 7));
      std::string local = p.name("a Skolem symbol name");
      std::string var = p.name("an existential label");
      std::string arity = p.name("an arity");
      if (p.peek().kind != Token::Kind::String) throw ParseError("expected quoted iso type", line_no, 1);
      std::string iso = p.take().text;
      if (!std::all_of(arity.begin(), arity.end(), [](char c) { return std::isdigit(static_cast<unsigned char>(c)); })) {
        throw ParseError("bad arity " + arity, line_no, 1);
      }
      table[local] = intern_skolem_symbol(SkolemSymbol{iso, var, static_cast<uint32_t>(std::stoul(arity))});
      std::fill(text.begin() + static_cast<long>(line_start), text.begin() + static_cast<long>(end), ' ');
    }
    line_start = end + 1;
    ++line_no;
  }
  return table;
}

}  // namespace

Instance parse_database(std::string_view text) {
  std::string copy(text);
  auto table = take_skolem_table(copy);
  Parser p(copy);
  p.set_skolem_table(&table);
  Instance out;
  while (!p.at_end()) {
    out.insert(p.atom(TermContext::Data));
    p.expect(".");
  }
  return out;
}

namespace {

class RegexParser {
 public:
  RegexParser(Parser& p, bool& saw_inverse) : p_(p), saw_inverse_(saw_inverse) {}

  Regex alt() {
    std::vector<Regex> parts{cat()};
    while (p_.accept("|")) parts.push_back(cat());
    return Regex::alt(std::move(parts));
  }

 private:
  Regex cat() {
    std::vector<Regex> parts{rep()};
    while (p_.accept("/")) parts.push_back(rep());
    return Regex::concat(std::move(parts));
  }

  Regex rep() {
    Regex r = prim();
    if (p_.accept("*")) return Regex::star(std::move(r));
    if (p_.accept("+")) return Regex::plus(std::move(r));
    if (p_.accept("?")) return Regex::optional(std::move(r));
    return r;
  }

  Regex prim() {
    if (p_.accept("(")) {
      if (p_.accept(")")) return Regex::epsilon();
      Regex r = alt();
      p_.expect(")");
      return r;
    }
    if (p_.accept("[")) {
      p_.expect("]");
      return Regex::empty();
    }
    bool inverse = p_.accept("^");
    if (inverse) saw_inverse_ = true;
    return Regex::symbol(Predicate(p_.name("a predicate name")), inverse);
  }

  Parser& p_;
  bool& saw_inverse_;
};

}  // namespace

Regex parse_regex(std::string_view text) {
  Parser p(text);
  bool inverse = false;
  Regex r = RegexParser(p, inverse).alt();
  if (!p.at_end()) p.fail("trailing input");
  return r;
}

Query parse_query(std::string_view text, const Signature* signature) {
  Parser p(text);
  Query q;
  std::optional<QueryKind> declared;
  if (p.peek(1).kind == Token::Kind::Punct && p.peek(1).text == ":" && p.peek().kind == Token::Kind::Name) {
    std::string k = p.peek().text;
    if (k == "rpq") declared = QueryKind::RPQ;
    else if (k == "2rpq") declared = QueryKind::TwoWay;
    else if (k == "hrpq") declared = QueryKind::Hyper;
    else p.fail("unknown query kind");
    p.take();
    p.take();
  }
  bool inverse = false;
  q.regex = RegexParser(p, inverse).alt();
  if (!p.at_end()) p.fail("trailing input");
  q.kind = declared.value_or(inverse ? QueryKind::TwoWay : QueryKind::RPQ);
  if (inverse && q.kind != QueryKind::TwoWay) throw ParseError("'^' is only allowed in 2RPQs", 1, 1);
  if (signature) {
    for (const Label& l : q.regex.labels()) {
      if (!signature->contains(l.predicate)) continue;
      size_t n = signature->arity(l.predicate);
      if (q.kind == QueryKind::Hyper && n < 2) {
        throw ParseError("HRPQ predicate " + l.predicate.name() + " has arity " + std::to_string(n), 1, 1);
      }
      if (q.kind != QueryKind::Hyper && n != 2) {
        throw ParseError("path predicate " + l.predicate.name() + " is not binary", 1, 1);
      }
    }
  }
  return q;
}

UCQ parse_ucq(std::string_view text) {
  Parser p(text);
  UCQ out;
  bool first = true;
  while (!p.at_end()) {
    const Token start = p.peek();
    p.name("a query head");
    CQ q;
    p.expect("(");
    if (!p.is(")")) {
      do {
        q.answer.push_back(p.term(TermContext::Rule));
      } while (p.accept(","));
    }
    p.expect(")");
    p.expect(":-");
    q.atoms = p.atoms(TermContext::Rule);
    p.expect(".");
    if (first) out.arity = q.answer.size();
    if (q.answer.size() != out.arity) throw ParseError("disjuncts disagree on arity", start.line, start.column);
    TermSet vars = terms_of(q.atoms);
    for (Term a : q.answer) {
      if (a.is_variable() && !vars.contains(a)) {
        throw ParseError("answer variable " + to_string(a) + " does not occur in the body", start.line, start.column);
      }
    }
    first = false;
    out.disjuncts.push_back(std::move(q));
  }
  return out;
}

TCA parse_tca(std::string_view text) {
  Parser p(text);
  TCA m;
  p.keyword("start");
  m.start = p.name("a state");
  p.expect(".");
  p.keyword("halt");
  m.halt = p.name("a state");
  p.expect(".");
  struct Pending {
    std::string state;
    Token where;
  };
  std::vector<Pending> references;
  m.states.push_back(m.start);
  auto counter = [&]() {
    std::string c = p.name("a counter");
    if (c != "X" && c != "Y") p.fail("counter must be X or Y");
    return c == "X" ? Counter::X : Counter::Y;
  };
  // Returns the signed increment of `+= k`, `-= k`, `+= -k`.
  auto update = [&]() {
    int sign = 1;
    if (p.accept("-=")) sign = -1;
    else p.expect("+=");
    if (p.accept("-")) sign = -sign;
    const Token t = p.peek();
    std::string k = p.name("a number");
    if (!std::all_of(k.begin(), k.end(), [](char c) { return std::isdigit(static_cast<unsigned char>(c)); })) {
      throw ParseError("expected a number", t.line, t.column);
    }
    long v = std::stol(k);
    return std::pair<long, Token>(sign * v, t);
  };
  while (!p.at_end()) {
    p.keyword("state");
    const Token at = p.peek();
    std::string q = p.name("a state");
    p.expect(":");
    if (m.instr.contains(q)) throw ParseError("second instruction for state " + q, at.line, at.column);
    if (q == m.halt) throw ParseError("halting state " + q + " cannot carry an instruction", at.line, at.column);
    Instruction instr;
    p.keyword("if");
    instr.counter = counter();
    p.expect("==");
    {
      const Token t = p.peek();
      if (p.name("0") != "0") throw ParseError("only zero tests are supported", t.line, t.column);
    }
    p.keyword("then");
    if (!p.is_name("goto")) {
      const Token t = p.peek();
      if (counter() != instr.counter) throw ParseError("then-branch must update the tested counter", t.line, t.column);
      auto [d, where] = update();
      if (d != 1) throw ParseError("then-branch must increment by 1", where.line, where.column);
    }
    p.keyword("goto");
    Token tt = p.peek();
    instr.then_state = p.name("a state");
    references.push_back({instr.then_state, tt});
    p.keyword("else");
    if (p.is_name("goto")) p.fail("else-branch needs a counter update");
    {
      const Token t = p.peek();
      if (counter() != instr.counter) throw ParseError("else-branch must update the tested counter", t.line, t.column);
    }
    auto [d, where] = update();
    if (d != 1 && d != -1) throw ParseError("increment must be +1 or -1", where.line, where.column);
    instr.delta = static_cast<int>(d);
    p.keyword("goto");
    Token ft = p.peek();
    instr.else_state = p.name("a state");
    references.push_back({instr.else_state, ft});
    p.expect(".");
    m.instr.emplace(q, instr);
    if (std::find(m.states.begin(), m.states.end(), q) == m.states.end()) m.states.push_back(q);
  }
  if (std::find(m.states.begin(), m.states.end(), m.halt) == m.states.end()) m.states.push_back(m.halt);
  for (const Pending& r : references) {
    if (std::find(m.states.begin(), m.states.end(), r.state) == m.states.end()) {
      throw ParseError("unknown state " + r.state, r.where.line, r.where.column);
    }
  }
  if (m.start != m.halt && !m.instr.contains(m.start)) throw ParseError("start state has no instruction", 1, 1);
  validate(m);
  return m;
}

std::string format_rule(const Rule& rule) { return to_string(rule); }

std::string format_ruleset(const Ruleset& rules) { return to_string(rules); }

std::string format_database(const Instance& instance) {
  std::set<uint32_t> symbols;
  std::function<void(Term)> collect = [&](Term t) {
    if (!t.is_functional()) return;
    symbols.insert(t.symbol_id());
    for (Term a : t.args()) collect(a);
  };
  std::vector<std::string> facts;
  for (const Atom& a : instance.atoms()) {
    for (Term t : a.args) collect(t);
    facts.push_back(to_string(a) + ".");
  }
  std::sort(facts.begin(), facts.end());
  std::string out;
  for (uint32_t s : symbols) {
    const SkolemSymbol& sym = skolem_symbol(s);
    out += "#skolem f" + std::to_string(s) + " " + sym.existential_var + " " + std::to_string(sym.arity) + " \"" +
           escape(sym.iso_type) + "\"\n";
  }
  for (const auto& f : facts) out += f + "\n";
  return out;
}

std::string format_query(const Query& q) { return to_string(q); }

std::string format_ucq(const UCQ& q) {
  std::string out;
  for (const CQ& d : q.disjuncts) {
    out += "ans(";
    for (size_t i = 0; i < d.answer.size(); ++i) {
      if (i) out += ",";
      out += to_string(d.answer[i]);
    }
    out += ") :- ";
    for (size_t i = 0; i < d.atoms.size(); ++i) {
      if (i) out += ", ";
      out += to_string(d.atoms[i]);
    }
    out += ".\n";
  }
  return out;
}

std::string format_tca(const TCA& m) {
  std::string out = "start " + m.start + ". halt " + m.halt + ".\n";
  for (const std::string& q : m.states) {
    auto it = m.instr.find(q);
    if (it == m.instr.end()) continue;
    const Instruction& i = it->second;
    const std::string c = i.counter == Counter::X ? "X" : "Y";
    out += "state " + q + ": if " + c + " == 0 then " + c + " += 1 goto " + i.then_state + " else " + c +
           (i.delta > 0 ? " += 1" : " -= 1") + " goto " + i.else_state + ".\n";
  }
  return out;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

}  // namespace stickyrpq
