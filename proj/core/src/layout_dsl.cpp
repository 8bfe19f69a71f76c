#include "twopath/layout_dsl.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <map>
#include <numbers>
#include <span>
#include <sstream>

#include "twopath/format.hpp"

namespace twopath {

std::string_view code_name(DiagnosticCode code) {
  switch (code) {
    case DiagnosticCode::lex_unexpected_character: return "LEX_UNEXPECTED_CHARACTER";
    case DiagnosticCode::lex_unterminated_string: return "LEX_UNTERMINATED_STRING";
    case DiagnosticCode::lex_malformed_number: return "LEX_MALFORMED_NUMBER";
    case DiagnosticCode::syntax_unexpected_token: return "SYNTAX_UNEXPECTED_TOKEN";
    case DiagnosticCode::unknown_section: return "UNKNOWN_SECTION";
    case DiagnosticCode::unknown_path: return "UNKNOWN_PATH";
    case DiagnosticCode::unknown_element: return "UNKNOWN_ELEMENT";
    case DiagnosticCode::unknown_key: return "UNKNOWN_KEY";
    case DiagnosticCode::duplicate_section: return "DUPLICATE_SECTION";
    case DiagnosticCode::duplicate_key: return "DUPLICATE_KEY";
    case DiagnosticCode::missing_section: return "MISSING_SECTION";
    case DiagnosticCode::missing_key: return "MISSING_KEY";
    case DiagnosticCode::type_mismatch: return "TYPE_MISMATCH";
    case DiagnosticCode::invalid_enum_value: return "INVALID_ENUM_VALUE";
    case DiagnosticCode::mixed_units: return "MIXED_UNITS";
    case DiagnosticCode::constraint_negative_length: return "CONSTRAINT_NEGATIVE_LENGTH";
    case DiagnosticCode::constraint_negative_gamma_ratio: return "CONSTRAINT_NEGATIVE_GAMMA_RATIO";
    case DiagnosticCode::constraint_free_gamma_ratio: return "CONSTRAINT_FREE_GAMMA_RATIO";
    case DiagnosticCode::constraint_nonpositive: return "CONSTRAINT_NONPOSITIVE";
    case DiagnosticCode::constraint_nonfinite: return "CONSTRAINT_NONFINITE";
    case DiagnosticCode::constraint_empty_path: return "CONSTRAINT_EMPTY_PATH";
    case DiagnosticCode::constraint_potential_samples: return "CONSTRAINT_POTENTIAL_SAMPLES";
    case DiagnosticCode::constraint_sweep: return "CONSTRAINT_SWEEP";
  }
  return "UNKNOWN";
}

namespace {

// ---------------------------------------------------------------- lexing

enum class Tok {
  ident,
  number,
  string,
  lbrace,
  rbrace,
  lparen,
  rparen,
  lbracket,
  rbracket,
  equals,
  semicolon,
  comma,
  end,
};

struct Token {
  Tok kind = Tok::end;
  std::string text;  // raw lexeme (decoded contents for strings)
  double number = 0.0;
  bool out_of_range = false;
  std::size_t offset = 0;
};

std::string_view describe(Tok kind) {
  switch (kind) {
    case Tok::ident: return "identifier";
    case Tok::number: return "number";
    case Tok::string: return "string";
    case Tok::lbrace: return "'{'";
    case Tok::rbrace: return "'}'";
    case Tok::lparen: return "'('";
    case Tok::rparen: return "')'";
    case Tok::lbracket: return "'['";
    case Tok::rbracket: return "']'";
    case Tok::equals: return "'='";
    case Tok::semicolon: return "';'";
    case Tok::comma: return "','";
    case Tok::end: return "end of input";
  }
  return "token";
}

bool is_ident_start(char c) {
  return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c == '_';
}
bool is_digit(char c) { return c >= '0' && c <= '9'; }
bool is_ident_char(char c) { return is_ident_start(c) || is_digit(c); }

class DiagnosticSink {
 public:
  explicit DiagnosticSink(std::string_view source) : source_(source) {}

  void add(DiagnosticCode code, std::size_t offset, std::string token, std::string message,
           std::string hint) {
    Diagnostic d;
    d.code = code;
    d.offset = source_.empty() ? 0 : std::min(offset, source_.size() - 1);
    d.line = 1;
    std::size_t line_start = 0;
    for (std::size_t i = 0; i < d.offset; ++i) {
      if (source_[i] == '\n') {
        ++d.line;
        line_start = i + 1;
      }
    }
    d.column = d.offset - line_start + 1;
    d.token = std::move(token);
    d.message = std::move(message);
    d.hint = std::move(hint);
    list_.push_back(std::move(d));
  }

  void add(DiagnosticCode code, const Token& at, std::string message, std::string hint) {
    add(code, at.offset, at.kind == Tok::string ? '"' + at.text + '"' : at.text,
        std::move(message), std::move(hint));
  }

  [[nodiscard]] bool empty() const { return list_.empty(); }
  std::vector<Diagnostic> take() { return std::move(list_); }

 private:
  std::string_view source_;
  std::vector<Diagnostic> list_;
};

std::size_t utf8_length(unsigned char lead) {
  if (lead >= 0xF0) return 4;
  if (lead >= 0xE0) return 3;
  if (lead >= 0xC0) return 2;
  return 1;
}

std::vector<Token> lex(std::string_view src, DiagnosticSink& diags) {
  std::vector<Token> out;
  std::size_t i = 0;
  const std::size_t n = src.size();
  while (i < n) {
    const char c = src[i];
    if (c == ' ' || c == '\t' || c == '\r' || c == '\n') {
      ++i;
      continue;
    }
    if (c == '#') {
      while (i < n && src[i] != '\n') ++i;
      continue;
    }
    Token t;
    t.offset = i;
    if (is_ident_start(c)) {
      std::size_t j = i;
      while (j < n && is_ident_char(src[j])) ++j;
      t.kind = Tok::ident;
      t.text = std::string(src.substr(i, j - i));
      out.push_back(std::move(t));
      i = j;
      continue;
    }
    const bool starts_number =
        is_digit(c) || ((c == '-' || c == '+' || c == '.') && i + 1 < n &&
                        (is_digit(src[i + 1]) || (src[i + 1] == '.' && i + 2 < n && is_digit(src[i + 2]))));
    if (starts_number) {
      std::size_t j = i;
      if (src[j] == '-' || src[j] == '+') ++j;
      while (j < n && is_digit(src[j])) ++j;
      if (j < n && src[j] == '.') {
        ++j;
        while (j < n && is_digit(src[j])) ++j;
      }
      if (j < n && (src[j] == 'e' || src[j] == 'E')) {
        std::size_t k = j + 1;
        if (k < n && (src[k] == '+' || src[k] == '-')) ++k;
        if (k < n && is_digit(src[k])) {
          while (k < n && is_digit(src[k])) ++k;
          j = k;
        }
      }
      bool malformed = false;
      while (j < n && (is_ident_char(src[j]) || src[j] == '.')) {
        malformed = true;
        ++j;
      }
      t.text = std::string(src.substr(i, j - i));
      if (malformed) {
        diags.add(DiagnosticCode::lex_malformed_number, i, t.text,
                  "malformed number '" + t.text + "'",
                  "write numbers as 12, -0.5 or 1.5e-3");
        // Keep a placeholder so the surrounding statement still parses.
        t.kind = Tok::number;
        out.push_back(std::move(t));
        i = j;
        continue;
      }
      std::string_view digits = t.text;
      if (digits.front() == '+') digits.remove_prefix(1);
      const auto result = std::from_chars(digits.data(), digits.data() + digits.size(), t.number);
      if (result.ec == std::errc::result_out_of_range) {
        t.out_of_range = true;
      } else if (result.ec != std::errc() || result.ptr != digits.data() + digits.size()) {
        diags.add(DiagnosticCode::lex_malformed_number, i, t.text,
                  "malformed number '" + t.text + "'", "write numbers as 12, -0.5 or 1.5e-3");
      }
      t.kind = Tok::number;
      out.push_back(std::move(t));
      i = j;
      continue;
    }
    if (c == '"') {
      std::size_t j = i + 1;
      std::string value;
      bool closed = false;
      while (j < n && src[j] != '\n') {
        if (src[j] == '"') {
          closed = true;
          ++j;
          break;
        }
        if (src[j] == '\\' && j + 1 < n && src[j + 1] != '\n') {
          const char e = src[j + 1];
          value += e == 'n' ? '\n' : e == 't' ? '\t' : e;
          j += 2;
          continue;
        }
        value += src[j++];
      }
      if (!closed) {
        diags.add(DiagnosticCode::lex_unterminated_string, i, std::string(src.substr(i, j - i)),
                  "string literal is not closed on this line", "add the closing '\"'");
      }
      t.kind = Tok::string;
      t.text = std::move(value);
      out.push_back(std::move(t));
      i = j;
      continue;
    }
    static constexpr std::pair<char, Tok> punctuation[] = {
        {'{', Tok::lbrace},   {'}', Tok::rbrace},   {'(', Tok::lparen},
        {')', Tok::rparen},   {'[', Tok::lbracket}, {']', Tok::rbracket},
        {'=', Tok::equals},   {';', Tok::semicolon}, {',', Tok::comma}};
    const auto* p = std::find_if(std::begin(punctuation), std::end(punctuation),
                                 [c](const auto& e) { return e.first == c; });
    if (p != std::end(punctuation)) {
      t.kind = p->second;
      t.text = std::string(1, c);
      out.push_back(std::move(t));
      ++i;
      continue;
    }
    const std::size_t len = std::min(utf8_length(static_cast<unsigned char>(c)), n - i);
    diags.add(DiagnosticCode::lex_unexpected_character, i, std::string(src.substr(i, len)),
              "unexpected character '" + std::string(src.substr(i, len)) + "'",
              "only sections, key = value; pairs, element calls and # comments are allowed");
    i += len;
  }
  Token end;
  end.kind = Tok::end;
  end.offset = n;
  out.push_back(end);
  return out;
}

// ---------------------------------------------------------------- syntax

struct Value {
  enum class Kind { number, ident, string, list } kind = Kind::number;
  Token token;               // first token of the value
  std::vector<Token> items;  // list elements
};

struct Entry {
  Token key;
  Value value;
};

struct ElementCall {
  Token name;
  std::vector<Entry> args;
};

// `damaged` marks a block where syntax recovery dropped tokens; missing-key
// and empty-path checks are skipped there since they would only echo the
// syntax error.
struct Section {
  Token name;
  std::vector<Entry> entries;
  bool damaged = false;
};

struct PathSection {
  Token name;
  std::vector<ElementCall> elements;
  bool damaged = false;
};

class Parser {
 public:
  Parser(std::vector<Token> tokens, DiagnosticSink& diags)
      : tokens_(std::move(tokens)), diags_(diags) {}

  struct Tree {
    std::map<std::string, Section> blocks;
    std::map<std::string, PathSection> paths;
  };

  Tree parse_document() {
    Tree tree;
    while (peek().kind != Tok::end) {
      if (peek().kind != Tok::ident) {
        unexpected("a section name (particle, path, splitter, sweep, oracle)");
        skip_section();
        continue;
      }
      const Token name = advance();
      if (name.text == "particle" || name.text == "splitter" || name.text == "sweep" ||
          name.text == "oracle") {
        Section section{name, {}};
        section.damaged = !parse_block(section.entries);
        if (tree.blocks.contains(name.text)) {
          diags_.add(DiagnosticCode::duplicate_section, name,
                     "section '" + name.text + "' appears more than once",
                     "merge the two '" + name.text + "' sections");
        } else {
          tree.blocks.emplace(name.text, std::move(section));
        }
      } else if (name.text == "path") {
        if (peek().kind != Tok::ident) {
          unexpected("a path name (upper or lower)");
          skip_section();
          continue;
        }
        PathSection path{advance(), {}};
        path.damaged = !parse_path_body(path.elements);
        const std::string& which = path.name.text;
        if (which != "upper" && which != "lower") {
          diags_.add(DiagnosticCode::unknown_path, path.name, "unknown path '" + which + "'",
                     "paths are named 'upper' (arm ABD) and 'lower' (arm ACD)");
        } else if (tree.paths.contains(which)) {
          diags_.add(DiagnosticCode::duplicate_section, path.name,
                     "path '" + which + "' appears more than once", "keep a single 'path " + which + "' section");
        } else {
          tree.paths.emplace(which, std::move(path));
        }
      } else {
        diags_.add(DiagnosticCode::unknown_section, name, "unknown section '" + name.text + "'",
                   "sections are particle, path upper, path lower, splitter, sweep, oracle");
        if (peek().kind == Tok::ident) advance();
        if (peek().kind == Tok::lbrace) {
          skip_braced();
        } else {
          skip_section();
        }
      }
    }
    return tree;
  }

 private:
  const Token& peek() const { return tokens_[pos_]; }
  const Token& advance() {
    const Token& t = tokens_[pos_];
    if (t.kind != Tok::end) ++pos_;
    return t;
  }

  void unexpected(std::string_view expected) {
    const Token& t = peek();
    diags_.add(DiagnosticCode::syntax_unexpected_token, t,
               "expected " + std::string(expected) + ", found " + std::string(describe(t.kind)),
               "check for a missing ';', '=' or closing bracket");
  }

  bool expect(Tok kind) {
    if (peek().kind == kind) {
      advance();
      return true;
    }
    unexpected(describe(kind));
    return false;
  }

  // Skips a {...} group starting at the current '{'.
  void skip_braced() {
    int depth = 0;
    while (peek().kind != Tok::end) {
      const Tok k = advance().kind;
      if (k == Tok::lbrace) ++depth;
      if (k == Tok::rbrace && --depth <= 0) return;
    }
  }

  // Top-level recovery: drop tokens up to the end of the current section.
  void skip_section() {
    advance();
    int depth = 0;
    while (peek().kind != Tok::end) {
      if (depth == 0 && peek().kind == Tok::ident) return;
      const Tok k = advance().kind;
      if (k == Tok::lbrace) ++depth;
      if (k == Tok::rbrace && --depth <= 0) return;
    }
  }

  // In-block recovery: drop tokens up to the next ';' (consumed) or '}'.
  void recover_statement() {
    while (peek().kind != Tok::end && peek().kind != Tok::rbrace) {
      const Tok k = peek().kind;
      if (k == Tok::lbrace) {
        skip_braced();
        continue;
      }
      advance();
      if (k == Tok::semicolon) return;
    }
  }

  bool parse_value(Value& value) {
    const Token& t = peek();
    value.token = t;
    switch (t.kind) {
      case Tok::number: value.kind = Value::Kind::number; advance(); return true;
      case Tok::ident: value.kind = Value::Kind::ident; advance(); return true;
      case Tok::string: value.kind = Value::Kind::string; advance(); return true;
      case Tok::lbracket: {
        value.kind = Value::Kind::list;
        advance();
        if (peek().kind == Tok::rbracket) {
          advance();
          return true;
        }
        while (true) {
          if (peek().kind != Tok::number) {
            unexpected("a number in the list");
            return false;
          }
          value.items.push_back(advance());
          if (peek().kind == Tok::comma) {
            advance();
            continue;
          }
          return expect(Tok::rbracket);
        }
      }
      default:
        unexpected("a value");
        return false;
    }
  }

  // False when recovery skipped part of the block.
  bool parse_block(std::vector<Entry>& entries) {
    if (!expect(Tok::lbrace)) {
      skip_section();
      return false;
    }
    bool clean = true;
    while (true) {
      const Tok k = peek().kind;
      if (k == Tok::rbrace) {
        advance();
        return clean;
      }
      if (k == Tok::end) {
        unexpected("'}'");
        return false;
      }
      if (k != Tok::ident) {
        unexpected("a key");
        recover_statement();
        clean = false;
        continue;
      }
      Entry e{advance(), {}};
      if (!expect(Tok::equals) || !parse_value(e.value) || !expect(Tok::semicolon)) {
        recover_statement();
        clean = false;
        continue;
      }
      entries.push_back(std::move(e));
    }
  }

  bool parse_path_body(std::vector<ElementCall>& elements) {
    if (!expect(Tok::lbrace)) {
      skip_section();
      return false;
    }
    bool clean = true;
    while (true) {
      const Tok k = peek().kind;
      if (k == Tok::rbrace) {
        advance();
        return clean;
      }
      if (k == Tok::end) {
        unexpected("'}'");
        return false;
      }
      if (k != Tok::ident) {
        unexpected("an element (segment, cavity, phase)");
        recover_statement();
        clean = false;
        continue;
      }
      ElementCall call{advance(), {}};
      if (!parse_arguments(call.args) || !expect(Tok::semicolon)) {
        recover_statement();
        clean = false;
        continue;
      }
      elements.push_back(std::move(call));
    }
  }

  bool parse_arguments(std::vector<Entry>& args) {
    if (!expect(Tok::lparen)) return false;
    if (peek().kind == Tok::rparen) {
      advance();
      return true;
    }
    while (true) {
      if (peek().kind != Tok::ident) {
        unexpected("an argument name");
        return false;
      }
      Entry e{advance(), {}};
      if (!expect(Tok::equals) || !parse_value(e.value)) return false;
      args.push_back(std::move(e));
      if (peek().kind == Tok::comma) {
        advance();
        continue;
      }
      return expect(Tok::rparen);
    }
  }

  std::vector<Token> tokens_;
  std::size_t pos_ = 0;
  DiagnosticSink& diags_;
};

// ---------------------------------------------------------------- semantics

std::string join(std::span<const std::string_view> names) {
  std::string out;
  for (std::size_t i = 0; i < names.size(); ++i) {
    if (i > 0) out += ", ";
    out += names[i];
  }
  return out;
}

// Keyed view over a block or argument list with duplicate and unknown-key
// checks applied up front.
class Fields {
 public:
  Fields(const std::vector<Entry>& entries, std::vector<std::string_view> allowed,
         std::string_view context, DiagnosticSink& diags, bool damaged = false)
      : diags_(diags), damaged_(damaged) {
    for (const auto& e : entries) {
      if (std::find(allowed.begin(), allowed.end(), e.key.text) == allowed.end()) {
        diags.add(DiagnosticCode::unknown_key, e.key,
                  "unknown key '" + e.key.text + "' in " + std::string(context),
                  "allowed keys: " + join(allowed));
        continue;
      }
      if (fields_.contains(e.key.text)) {
        diags.add(DiagnosticCode::duplicate_key, e.key,
                  "key '" + e.key.text + "' given more than once", "remove the repeated key");
        continue;
      }
      fields_.emplace(e.key.text, &e);
    }
  }

  [[nodiscard]] const Entry* find(const std::string& key) const {
    auto it = fields_.find(key);
    return it == fields_.end() ? nullptr : it->second;
  }

  // Numeric value, or nullopt after reporting a type or range problem.
  std::optional<double> number(const Entry& e) const {
    if (e.value.kind != Value::Kind::number) {
      diags_.add(DiagnosticCode::type_mismatch, e.value.token,
                 "'" + e.key.text + "' expects a number", "write a numeric literal such as 1.5");
      return std::nullopt;
    }
    if (e.value.token.out_of_range || !std::isfinite(e.value.token.number)) {
      diags_.add(DiagnosticCode::constraint_nonfinite, e.value.token,
                 "'" + e.key.text + "' is outside the finite double range",
                 "use a value of magnitude below 1e308 and above 1e-308");
      return std::nullopt;
    }
    return e.value.token.number;
  }

  std::optional<double> number(const std::string& key) const {
    const Entry* e = find(key);
    return e == nullptr ? std::nullopt : number(*e);
  }

  std::optional<std::string> word(const Entry& e) const {
    if (e.value.kind != Value::Kind::ident) {
      diags_.add(DiagnosticCode::type_mismatch, e.value.token,
                 "'" + e.key.text + "' expects a bare word", "write e.g. " + e.key.text + " = linear;");
      return std::nullopt;
    }
    return e.value.token.text;
  }

  void missing(const Token& owner, const std::string& key, const std::string& hint) const {
    if (damaged_) return;
    diags_.add(DiagnosticCode::missing_key, owner,
               "missing required key '" + key + "' in '" + owner.text + "'", hint);
  }

 private:
  std::map<std::string, const Entry*> fields_;
  DiagnosticSink& diags_;
  bool damaged_;
};

std::optional<UnstableParticle> read_particle(const Section& section, DiagnosticSink& diags) {
  const Fields f(section.entries, {"ell", "gamma_si", "k", "label", "mass_si", "momentum_si"},
                 "particle", diags, section.damaged);
  UnstableParticle particle;
  bool ok = true;

  if (const Entry* label = f.find("label")) {
    if (label->value.kind == Value::Kind::string) {
      particle.label = label->value.token.text;
    } else {
      diags.add(DiagnosticCode::type_mismatch, label->value.token, "'label' expects a string",
                "quote the label: label = \"name\";");
      ok = false;
    }
  }

  const Entry* si_keys[] = {f.find("momentum_si"), f.find("mass_si"), f.find("gamma_si")};
  const bool any_si = std::any_of(std::begin(si_keys), std::end(si_keys), [](auto* e) { return e != nullptr; });
  const bool any_dimensionless = f.find("k") != nullptr || f.find("ell") != nullptr;

  auto positive = [&](const Entry& e, std::optional<double> v) {
    if (v && !(*v > 0.0)) {
      diags.add(DiagnosticCode::constraint_nonpositive, e.value.token,
                "'" + e.key.text + "' must be positive", "use a value greater than zero");
      return false;
    }
    return v.has_value();
  };

  if (any_si && any_dimensionless) {
    const Entry* first = nullptr;
    for (const Entry* e : si_keys) {
      if (e != nullptr && (first == nullptr || e->key.offset < first->key.offset)) first = e;
    }
    diags.add(DiagnosticCode::mixed_units, first->key,
              "particle mixes dimensionless (k, ell) and SI keys",
              "give either k and ell, or momentum_si, mass_si and gamma_si");
    return std::nullopt;
  }

  if (any_si) {
    const char* names[] = {"momentum_si", "mass_si", "gamma_si"};
    double values[3] = {0.0, 0.0, 0.0};
    for (int i = 0; i < 3; ++i) {
      if (si_keys[i] == nullptr) {
        f.missing(section.name, names[i], "SI particles need momentum_si, mass_si and gamma_si");
        ok = false;
        continue;
      }
      const auto v = f.number(*si_keys[i]);
      if (!v) {
        ok = false;
        continue;
      }
      if (i < 2 && !positive(*si_keys[i], v)) {
        ok = false;
        continue;
      }
      if (i == 2 && *v < 0.0) {
        diags.add(DiagnosticCode::constraint_nonpositive, si_keys[i]->value.token,
                  "'gamma_si' must not be negative", "use 0 for a stable particle");
        ok = false;
        continue;
      }
      values[i] = *v;
    }
    if (!ok) return std::nullopt;
    particle.k = values[0] / kReducedPlanck;
    particle.ell = values[2] == 0.0 ? kInfinity : values[0] / (values[1] * values[2]);
    if (!std::isfinite(particle.k) || particle.ell == 0.0 || std::isnan(particle.ell)) {
      diags.add(DiagnosticCode::constraint_nonfinite, section.name,
                "SI particle converts to a non-finite k or ell", "check the magnitudes of the SI values");
      return std::nullopt;
    }
    return particle;
  }

  const Entry* k = f.find("k");
  const Entry* ell = f.find("ell");
  if (k == nullptr) {
    f.missing(section.name, "k", "add k = <wavenumber>;");
    ok = false;
  } else if (!positive(*k, f.number(*k))) {
    ok = false;
  } else {
    particle.k = k->value.token.number;
  }
  if (ell == nullptr) {
    f.missing(section.name, "ell", "add ell = <decay length>; (ell = inf for a stable particle)");
    ok = false;
  } else if (ell->value.kind == Value::Kind::ident && ell->value.token.text == "inf") {
    particle.ell = kInfinity;
  } else if (ell->value.kind == Value::Kind::ident) {
    diags.add(DiagnosticCode::type_mismatch, ell->value.token, "'ell' expects a number or inf",
              "write ell = 1000; or ell = inf;");
    ok = false;
  } else if (!positive(*ell, f.number(*ell))) {
    ok = false;
  } else {
    particle.ell = ell->value.token.number;
  }
  if (!ok) return std::nullopt;
  return particle;
}

std::optional<PathSegment> read_element(const ElementCall& call, DiagnosticSink& diags) {
  const std::string& kind = call.name.text;
  if (kind != "segment" && kind != "cavity" && kind != "phase") {
    diags.add(DiagnosticCode::unknown_element, call.name, "unknown path element '" + kind + "'",
              "elements are segment(...), cavity(...) and phase(...)");
    return std::nullopt;
  }
  std::vector<std::string_view> allowed;
  if (kind == "segment") allowed = {"gamma_ratio", "length", "potential"};
  if (kind == "cavity") allowed = {"gamma_ratio", "length"};
  if (kind == "phase") allowed = {"phi"};
  const Fields f(call.args, allowed, kind + "(...)", diags);
  bool ok = true;

  PathSegment segment;
  if (kind == "phase") {
    segment.kind = SegmentKind::phase_shifter;
    if (const Entry* phi = f.find("phi")) {
      const auto v = f.number(*phi);
      if (v) {
        segment.phase_offset = *v;
      } else {
        ok = false;
      }
    }
    return ok ? std::optional(segment) : std::nullopt;
  }

  segment.kind = kind == "cavity" ? SegmentKind::cavity : SegmentKind::free;
  const Entry* length = f.find("length");
  if (length == nullptr) {
    f.missing(call.name, "length", "add length = <value>");
    ok = false;
  } else if (const auto v = f.number(*length); !v) {
    ok = false;
  } else if (*v < 0.0) {
    diags.add(DiagnosticCode::constraint_negative_length, length->value.token,
              "length must not be negative", "use a length >= 0");
    ok = false;
  } else {
    segment.length = *v;
  }

  if (const Entry* g = f.find("gamma_ratio")) {
    if (const auto v = f.number(*g); !v) {
      ok = false;
    } else if (*v < 0.0) {
      diags.add(DiagnosticCode::constraint_negative_gamma_ratio, g->value.token,
                "gamma_ratio must not be negative", "use 0 for full suppression of the decay");
      ok = false;
    } else if (segment.kind == SegmentKind::free && *v != 1.0) {
      diags.add(DiagnosticCode::constraint_free_gamma_ratio, g->value.token,
                "free segments decay at the free-space rate (gamma_ratio = 1)",
                "use cavity(length=..., gamma_ratio=...) for a modified decay rate");
      ok = false;
    } else {
      segment.gamma_ratio = *v;
    }
  }

  if (const Entry* p = f.find("potential")) {
    if (p->value.kind != Value::Kind::list) {
      diags.add(DiagnosticCode::type_mismatch, p->value.token, "'potential' expects a list",
                "write potential = [v0, v1, ...]");
      ok = false;
    } else {
      for (const Token& item : p->value.items) {
        if (item.out_of_range || !std::isfinite(item.number)) {
          diags.add(DiagnosticCode::constraint_nonfinite, item, "potential sample is not finite",
                    "use finite samples");
          ok = false;
        }
        segment.potential.push_back(item.number);
      }
      if (p->value.items.size() < 2) {
        diags.add(DiagnosticCode::constraint_potential_samples, p->value.token,
                  "potential needs at least 2 samples", "sample the potential at both segment ends");
        ok = false;
      }
    }
  }
  return ok ? std::optional(segment) : std::nullopt;
}

std::optional<SplitterConvention> read_splitter(const Section& section, DiagnosticSink& diags) {
  const Fields f(section.entries, {"alpha", "beta", "convention", "delta", "mirror_phase"},
                 "splitter", diags);
  SplitterConvention convention;
  bool ok = true;
  SplitterKind kind = SplitterKind::symmetric;
  if (const Entry* c = f.find("convention")) {
    const auto word = f.word(*c);
    if (!word) {
      ok = false;
    } else if (*word == "symmetric") {
      kind = SplitterKind::symmetric;
    } else if (*word == "hadamard") {
      kind = SplitterKind::hadamard;
    } else if (*word == "general") {
      kind = SplitterKind::general;
    } else {
      diags.add(DiagnosticCode::invalid_enum_value, c->value.token,
                "unknown splitter convention '" + *word + "'", "use symmetric, hadamard or general");
      ok = false;
    }
  }
  const char* angles[] = {"alpha", "beta", "delta", "mirror_phase"};
  if (kind != SplitterKind::general) {
    for (const char* a : angles) {
      if (const Entry* e = f.find(a)) {
        diags.add(DiagnosticCode::unknown_key, e->key,
                  "'" + e->key.text + "' only applies to convention = general",
                  "set convention = general; or drop the angle");
        ok = false;
      }
    }
    if (!ok) return std::nullopt;
    return kind == SplitterKind::hadamard ? SplitterConvention::hadamard() : SplitterConvention::symmetric();
  }
  convention = SplitterConvention::general(0.0, 0.0, std::numbers::pi / 2.0, std::numbers::pi);
  double* slots[] = {&convention.alpha, &convention.beta, &convention.delta, &convention.mirror_phase};
  for (int i = 0; i < 4; ++i) {
    if (const Entry* e = f.find(angles[i])) {
      if (const auto v = f.number(*e)) {
        *slots[i] = *v;
      } else {
        ok = false;
      }
    }
  }
  return ok ? std::optional(convention) : std::nullopt;
}

std::optional<SweepSpec> read_sweep(const Section& section, DiagnosticSink& diags) {
  const Fields f(section.entries, {"end", "parameter", "scale", "start", "steps"}, "sweep", diags,
                 section.damaged);
  SweepSpec spec;
  bool ok = true;

  if (const Entry* p = f.find("parameter")) {
    if (const auto word = f.word(*p); !word) {
      ok = false;
    } else if (const auto parsed = parse_sweep_parameter(*word)) {
      spec.parameter = *parsed;
    } else {
      diags.add(DiagnosticCode::invalid_enum_value, p->value.token,
                "unknown sweep parameter '" + *word + "'",
                "use gamma_ratio, cavity_length_over_ell or phase");
      ok = false;
    }
  } else {
    f.missing(section.name, "parameter", "add parameter = gamma_ratio;");
    ok = false;
  }

  if (const Entry* s = f.find("scale")) {
    if (const auto word = f.word(*s); !word) {
      ok = false;
    } else if (const auto parsed = parse_sweep_scale(*word)) {
      spec.scale = *parsed;
    } else {
      diags.add(DiagnosticCode::invalid_enum_value, s->value.token, "unknown sweep scale '" + *word + "'",
                "use linear or log");
      ok = false;
    }
  }

  for (const char* key : {"start", "end"}) {
    const Entry* e = f.find(key);
    if (e == nullptr) {
      f.missing(section.name, key, std::string("add ") + key + " = <value>;");
      ok = false;
      continue;
    }
    const auto v = f.number(*e);
    if (!v) {
      ok = false;
      continue;
    }
    (std::string_view(key) == "start" ? spec.start : spec.end) = *v;
  }

  if (const Entry* e = f.find("steps")) {
    const auto v = f.number(*e);
    if (!v) {
      ok = false;
    } else if (*v != std::floor(*v) || *v > 1e7) {
      diags.add(DiagnosticCode::type_mismatch, e->value.token, "'steps' expects an integer",
                "write steps = 101;");
      ok = false;
    } else if (*v < 2) {
      diags.add(DiagnosticCode::constraint_sweep, e->value.token, "a sweep needs at least 2 steps",
                "use steps >= 2");
      ok = false;
    } else {
      spec.steps = static_cast<int>(*v);
    }
  } else {
    f.missing(section.name, "steps", "add steps = <count>;");
    ok = false;
  }

  if (!ok) return std::nullopt;
  if (spec.start == spec.end) {
    diags.add(DiagnosticCode::constraint_sweep, f.find("end")->value.token,
              "sweep start and end coincide", "choose distinct endpoints");
    return std::nullopt;
  }
  if (spec.scale == SweepScale::log && !(spec.start > 0.0 && spec.end > 0.0)) {
    diags.add(DiagnosticCode::constraint_sweep, f.find("scale")->value.token,
              "log sweeps need positive endpoints", "use scale = linear; or positive start and end");
    return std::nullopt;
  }
  return spec;
}

std::optional<OracleSettings> read_oracle(const Section& section, DiagnosticSink& diags) {
  const Fields f(section.entries, {"dt", "dx", "packet_width", "tolerance"}, "oracle", diags);
  OracleSettings settings;
  bool ok = true;
  auto read_positive = [&](const char* key) -> std::optional<double> {
    const Entry* e = f.find(key);
    if (e == nullptr) return std::nullopt;
    const auto v = f.number(*e);
    if (!v) {
      ok = false;
      return std::nullopt;
    }
    if (!(*v > 0.0)) {
      diags.add(DiagnosticCode::constraint_nonpositive, e->value.token,
                "'" + e->key.text + "' must be positive", "use a value greater than zero");
      ok = false;
      return std::nullopt;
    }
    return v;
  };
  settings.dt = read_positive("dt");
  settings.dx = read_positive("dx");
  settings.packet_width = read_positive("packet_width");
  if (const auto tol = read_positive("tolerance")) settings.tolerance = *tol;
  return ok ? std::optional(settings) : std::nullopt;
}

// ---------------------------------------------------------------- output

std::string quote(std::string_view s) {
  std::string out = "\"";
  for (char c : s) {
    if (c == '"' || c == '\\') {
      out += '\\';
      out += c;
    } else if (c == '\n') {
      out += "\\n";
    } else if (c == '\t') {
      out += "\\t";
    } else {
      out += c;
    }
  }
  return out + '"';
}

void write_segment(std::ostringstream& out, const PathSegment& s) {
  out << "  ";
  switch (s.kind) {
    case SegmentKind::phase_shifter:
      out << "phase(phi=" << format_double(s.phase_offset) << ");\n";
      return;
    case SegmentKind::cavity:
      out << "cavity(gamma_ratio=" << format_double(s.gamma_ratio)
          << ", length=" << format_double(s.length) << ");\n";
      return;
    case SegmentKind::free:
      out << "segment(length=" << format_double(s.length);
      if (!s.potential.empty()) {
        out << ", potential=[";
        for (std::size_t i = 0; i < s.potential.size(); ++i) {
          if (i > 0) out << ", ";
          out << format_double(s.potential[i]);
        }
        out << ']';
      }
      out << ");\n";
      return;
  }
}

}  // namespace

ParseResult parse(std::string_view text) {
  DiagnosticSink diags(text);
  Parser parser(lex(text, diags), diags);
  const Parser::Tree tree = parser.parse_document();

  LayoutDocument doc;
  bool ok = true;
  const std::size_t end_offset = text.empty() ? 0 : text.size() - 1;

  if (auto it = tree.blocks.find("particle"); it != tree.blocks.end()) {
    if (auto p = read_particle(it->second, diags)) {
      doc.particle = std::move(*p);
    } else {
      ok = false;
    }
  } else {
    diags.add(DiagnosticCode::missing_section, end_offset, "", "missing 'particle' section",
              "add particle { k = ...; ell = ...; }");
    ok = false;
  }

  for (const char* which : {"upper", "lower"}) {
    auto it = tree.paths.find(which);
    if (it == tree.paths.end()) {
      diags.add(DiagnosticCode::missing_section, end_offset, "",
                std::string("missing 'path ") + which + "' section",
                std::string("add path ") + which + " { segment(length=...); }");
      ok = false;
      continue;
    }
    auto& target = std::string_view(which) == "upper" ? doc.layout.upper : doc.layout.lower;
    for (const ElementCall& call : it->second.elements) {
      if (auto segment = read_element(call, diags)) {
        target.push_back(std::move(*segment));
      } else {
        ok = false;
      }
    }
    if (it->second.elements.empty() && !it->second.damaged) {
      diags.add(DiagnosticCode::constraint_empty_path, it->second.name,
                std::string("path '") + which + "' has no elements",
                "add at least one segment(...), cavity(...) or phase(...)");
      ok = false;
    }
  }

  if (auto it = tree.blocks.find("splitter"); it != tree.blocks.end()) {
    if (auto s = read_splitter(it->second, diags)) {
      doc.layout.splitter = *s;
    } else {
      ok = false;
    }
  }
  if (auto it = tree.blocks.find("sweep"); it != tree.blocks.end()) {
    doc.sweep = read_sweep(it->second, diags);
    ok = ok && doc.sweep.has_value();
  }
  if (auto it = tree.blocks.find("oracle"); it != tree.blocks.end()) {
    doc.oracle = read_oracle(it->second, diags);
    ok = ok && doc.oracle.has_value();
  }

  ParseResult result;
  std::vector<Diagnostic> list = diags.take();
  std::stable_sort(list.begin(), list.end(),
                   [](const Diagnostic& a, const Diagnostic& b) { return a.offset < b.offset; });
  result.diagnostics = std::move(list);
  if (ok && result.diagnostics.empty()) result.document = std::move(doc);
  return result;
}

std::string serialize(const LayoutDocument& document) {
  std::ostringstream out;
  const UnstableParticle& p = document.particle;
  out << "particle {\n";
  out << "  ell = " << format_double(p.ell) << ";\n";
  out << "  k = " << format_double(p.k) << ";\n";
  if (!p.label.empty()) out << "  label = " << quote(p.label) << ";\n";
  out << "}\n";

  for (const char* which : {"upper", "lower"}) {
    const auto& segments = std::string_view(which) == "upper" ? document.layout.upper
                                                              : document.layout.lower;
    out << "path " << which << " {\n";
    for (const auto& s : segments) write_segment(out, s);
    out << "}\n";
  }

  const SplitterConvention& c = document.layout.splitter;
  out << "splitter {\n";
  if (c.kind == SplitterKind::general) {
    out << "  alpha = " << format_double(c.alpha) << ";\n";
    out << "  beta = " << format_double(c.beta) << ";\n";
    out << "  convention = general;\n";
    out << "  delta = " << format_double(c.delta) << ";\n";
    out << "  mirror_phase = " << format_double(c.mirror_phase) << ";\n";
  } else {
    out << "  convention = " << (c.kind == SplitterKind::hadamard ? "hadamard" : "symmetric") << ";\n";
  }
  out << "}\n";

  if (document.sweep) {
    const SweepSpec& s = *document.sweep;
    out << "sweep {\n";
    out << "  end = " << format_double(s.end) << ";\n";
    out << "  parameter = " << to_string(s.parameter) << ";\n";
    out << "  scale = " << to_string(s.scale) << ";\n";
    out << "  start = " << format_double(s.start) << ";\n";
    out << "  steps = " << s.steps << ";\n";
    out << "}\n";
  }
  if (document.oracle) {
    const OracleSettings& o = *document.oracle;
    out << "oracle {\n";
    if (o.dt) out << "  dt = " << format_double(*o.dt) << ";\n";
    if (o.dx) out << "  dx = " << format_double(*o.dx) << ";\n";
    if (o.packet_width) out << "  packet_width = " << format_double(*o.packet_width) << ";\n";
    out << "  tolerance = " << format_double(o.tolerance) << ";\n";
    out << "}\n";
  }
  return out.str();
}

std::string format_diagnostic(const Diagnostic& d, std::string_view source_name) {
  std::ostringstream out;
  out << source_name << ':' << d.line << ':' << d.column << ": error[" << code_name(d.code)
      << "]: " << d.message;
  if (!d.token.empty()) out << " (near '" << d.token << "')";
  out << '\n';
  if (!d.hint.empty()) out << "  hint: " << d.hint << '\n';
  return out.str();
}

}  // namespace twopath
