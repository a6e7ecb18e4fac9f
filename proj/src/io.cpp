#include "sharpcq/io.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <optional>
#include <ostream>
#include <sstream>

#include "sharpcq/errors.hpp"

namespace sharpcq {

namespace {

enum class Tok { Name, Variable, Number, Quoted, LParen, RParen, Comma, Dot, Implies, End };

struct Token {
  Tok kind;
  std::string text;
  std::size_t line;
  std::size_t column;
};

const char* describe(Tok t) {
  switch (t) {
    case Tok::Name: return "identifier";
    case Tok::Variable: return "variable";
    case Tok::Number: return "number";
    case Tok::Quoted: return "quoted constant";
    case Tok::LParen: return "'('";
    case Tok::RParen: return "')'";
    case Tok::Comma: return "','";
    case Tok::Dot: return "'.'";
    case Tok::Implies: return "':-'";
    case Tok::End: return "end of input";
  }
  return "?";
}

class Lexer {
 public:
  explicit Lexer(std::string_view text) : text_(text) {}

  Token next() {
    skip_blank();
    Token t{Tok::End, "", line_, column_};
    if (pos_ >= text_.size()) return t;
    char c = text_[pos_];
    auto ident_char = [](char ch) { return std::isalnum(static_cast<unsigned char>(ch)) || ch == '_'; };
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      std::size_t start = pos_;
      while (pos_ < text_.size() && ident_char(text_[pos_])) advance();
      t.text = std::string(text_.substr(start, pos_ - start));
      t.kind = std::isupper(static_cast<unsigned char>(c)) ? Tok::Variable : Tok::Name;
      return t;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) ||
        (c == '-' && pos_ + 1 < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_ + 1])))) {
      std::size_t start = pos_;
      advance();
      while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) advance();
      if (pos_ < text_.size() && ident_char(text_[pos_]))
        throw ParseError("malformed number", t.line, t.column);
      t.kind = Tok::Number;
      t.text = std::string(text_.substr(start, pos_ - start));
      return t;
    }
    if (c == '"' || c == '\'') {
      const char quote = c;
      advance();
      while (true) {
        if (pos_ >= text_.size()) throw ParseError("unterminated quoted constant", t.line, t.column);
        char ch = text_[pos_];
        if (ch == quote) {
          advance();
          break;
        }
        if (ch == '\\') {
          advance();
          if (pos_ >= text_.size()) throw ParseError("unterminated quoted constant", t.line, t.column);
          ch = text_[pos_];
        }
        t.text.push_back(ch);
        advance();
      }
      t.kind = Tok::Quoted;
      return t;
    }
    if (c == ':' && pos_ + 1 < text_.size() && text_[pos_ + 1] == '-') {
      advance();
      advance();
      t.kind = Tok::Implies;
      return t;
    }
    switch (c) {
      case '(': t.kind = Tok::LParen; break;
      case ')': t.kind = Tok::RParen; break;
      case ',': t.kind = Tok::Comma; break;
      case '.': t.kind = Tok::Dot; break;
      default: throw ParseError(std::string("unexpected character '") + c + "'", t.line, t.column);
    }
    advance();
    return t;
  }

 private:
  void advance() {
    if (text_[pos_] == '\n') {
      ++line_;
      column_ = 1;
    } else {
      ++column_;
    }
    ++pos_;
  }

  void skip_blank() {
    while (pos_ < text_.size()) {
      char c = text_[pos_];
      if (std::isspace(static_cast<unsigned char>(c))) {
        advance();
      } else if (c == '%') {
        while (pos_ < text_.size() && text_[pos_] != '\n') advance();
      } else {
        break;
      }
    }
  }

  std::string_view text_;
  std::size_t pos_ = 0;
  std::size_t line_ = 1;
  std::size_t column_ = 1;
};

class Parser {
 public:
  explicit Parser(std::string_view text) : lexer_(text) { current_ = lexer_.next(); }

  Query query() {
    Token name = expect_name();
    std::vector<std::string> head;
    expect(Tok::LParen);
    if (current_.kind != Tok::RParen) {
      do {
        if (current_.kind != Tok::Variable)
          throw ParseError("head arguments must be variables", current_.line, current_.column);
        head.push_back(take().text);
      } while (accept(Tok::Comma));
    }
    expect(Tok::RParen);
    expect(Tok::Implies);
    std::vector<Atom> body;
    do body.push_back(atom(false));
    while (accept(Tok::Comma));
    expect(Tok::Dot);
    expect(Tok::End);
    return Query(name.text, std::move(body), std::move(head));
  }

  Database facts() {
    Database db;
    while (current_.kind != Tok::End) {
      Token at = current_;
      Atom a = atom(true);
      expect(Tok::Dot);
      std::vector<std::string> tuple;
      for (const auto& t : a.args) tuple.push_back(t.name);
      const auto* table = db.table(a.relation);
      if (table && table->arity != a.arity())
        throw ArityMismatch(std::to_string(at.line) + ":" + std::to_string(at.column) + ": relation " + a.relation +
                            " used with arities " + std::to_string(table->arity) + " and " +
                            std::to_string(a.arity()));
      db.add(a.relation, tuple);
    }
    return db;
  }

 private:
  Atom atom(bool ground) {
    Atom a{expect_name().text, {}};
    expect(Tok::LParen);
    if (current_.kind != Tok::RParen) {
      do a.args.push_back(term(ground));
      while (accept(Tok::Comma));
    }
    expect(Tok::RParen);
    return a;
  }

  Term term(bool ground) {
    switch (current_.kind) {
      case Tok::Variable:
        if (ground) return Term::constant(take().text);
        return Term::variable(take().text);
      case Tok::Name:
      case Tok::Number:
      case Tok::Quoted:
        return Term::constant(take().text);
      default:
        throw ParseError(std::string("expected a term, found ") + describe(current_.kind), current_.line,
                         current_.column);
    }
  }

  Token expect_name() {
    if (current_.kind != Tok::Name && current_.kind != Tok::Variable)
      throw ParseError(std::string("expected a name, found ") + describe(current_.kind), current_.line,
                       current_.column);
    return take();
  }

  void expect(Tok kind) {
    if (current_.kind != kind)
      throw ParseError(std::string("expected ") + describe(kind) + ", found " + describe(current_.kind),
                       current_.line, current_.column);
    if (kind != Tok::End) take();
  }

  bool accept(Tok kind) {
    if (current_.kind != kind) return false;
    take();
    return true;
  }

  Token take() {
    Token t = std::move(current_);
    current_ = lexer_.next();
    return t;
  }

  Lexer lexer_;
  Token current_;
};

bool plain_constant(const std::string& c) {
  if (c.empty()) return false;
  auto digits = [](std::string_view s) {
    return !s.empty() && std::all_of(s.begin(), s.end(), [](char ch) { return std::isdigit(static_cast<unsigned char>(ch)); });
  };
  if (digits(c) || (c[0] == '-' && digits(std::string_view(c).substr(1)))) return true;
  if (!std::islower(static_cast<unsigned char>(c[0]))) return false;
  return std::all_of(c.begin(), c.end(), [](char ch) { return std::isalnum(static_cast<unsigned char>(ch)) || ch == '_'; });
}

std::string print_constant(const std::string& c) {
  if (plain_constant(c)) return c;
  std::string out = "\"";
  for (char ch : c) {
    if (ch == '"' || ch == '\\') out.push_back('\\');
    out.push_back(ch);
  }
  out.push_back('"');
  return out;
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

std::string trim(std::string_view s) {
  auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return "";
  auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

// One headerless CSV file; fields may be double-quoted with "" as escape.
void read_csv(const std::filesystem::path& file, const std::string& relation, Database& db) {
  std::string text = read_file(file);
  std::optional<std::size_t> arity;
  std::size_t line = 1;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t start_line = line;
    std::vector<std::string> fields;
    std::string field;
    bool quoted_field = false;
    bool any = false;
    while (pos < text.size() && text[pos] != '\n') {
      char c = text[pos];
      if (c == '"' && trim(field).empty() && !quoted_field) {
        field.clear();
        quoted_field = true;
        ++pos;
        while (true) {
          if (pos >= text.size()) throw ParseError("unterminated quoted field in " + file.string(), start_line, 1);
          if (text[pos] == '"') {
            if (pos + 1 < text.size() && text[pos + 1] == '"') {
              field.push_back('"');
              pos += 2;
              continue;
            }
            ++pos;
            break;
          }
          if (text[pos] == '\n') ++line;
          field.push_back(text[pos++]);
        }
        any = true;
        continue;
      }
      if (c == ',') {
        fields.push_back(quoted_field ? field : trim(field));
        field.clear();
        quoted_field = false;
        any = true;
      } else {
        if (quoted_field && !std::isspace(static_cast<unsigned char>(c)))
          throw ParseError("text after a quoted field in " + file.string(), line, 1);
        if (!quoted_field) field.push_back(c);
        if (!std::isspace(static_cast<unsigned char>(c))) any = true;
      }
      ++pos;
    }
    if (pos < text.size()) ++pos;
    ++line;
    if (!any) continue;  // blank line
    fields.push_back(quoted_field ? field : trim(field));
    if (arity && *arity != fields.size())
      throw ArityMismatch(file.string() + ":" + std::to_string(start_line) + ": row has " +
                          std::to_string(fields.size()) + " fields, expected " + std::to_string(*arity));
    arity = fields.size();
    db.add(relation, fields);
  }
  db.declare(relation, arity.value_or(0));
}

std::string csv_field(const std::string& v) {
  bool needs_quotes = v.empty() || v.find_first_of(",\"\n\r") != std::string::npos || trim(v) != v;
  if (!needs_quotes) return v;
  std::string out = "\"";
  for (char c : v) {
    if (c == '"') out.push_back('"');
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

}  // namespace

Query parse_query(std::string_view text) { return Parser(text).query(); }

Query read_query_file(const std::filesystem::path& path) { return parse_query(read_file(path)); }

std::string print_atom(const Atom& a) {
  std::string out = a.relation + "(";
  for (std::size_t i = 0; i < a.args.size(); ++i) {
    if (i) out += ",";
    out += a.args[i].is_variable() ? a.args[i].name : print_constant(a.args[i].name);
  }
  return out + ")";
}

std::string print_vars(const VarSet& vars) {
  std::string out = "{";
  bool first = true;
  for (const auto& v : vars) {
    if (!first) out += ",";
    out += v;
    first = false;
  }
  return out + "}";
}

std::string print_query(const Query& q) {
  std::string out = q.name() + "(";
  for (std::size_t i = 0; i < q.head().size(); ++i) {
    if (i) out += ",";
    out += q.head()[i];
  }
  out += ") :- ";
  for (std::size_t i = 0; i < q.atoms().size(); ++i) {
    if (i) out += ", ";
    out += print_atom(q.atoms()[i]);
  }
  return out + ".";
}

Database parse_facts(std::string_view text) { return Parser(text).facts(); }

Database parse_database(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) throw Error("no such file or directory: " + path.string());
  if (!std::filesystem::is_directory(path)) return parse_facts(read_file(path));
  std::vector<std::filesystem::path> files;
  for (const auto& entry : std::filesystem::directory_iterator(path))
    if (entry.is_regular_file() && entry.path().extension() == ".csv") files.push_back(entry.path());
  std::sort(files.begin(), files.end());
  Database db;
  for (const auto& f : files) read_csv(f, f.stem().string(), db);
  return db;
}

void write_facts(const Database& db, std::ostream& out) {
  for (const auto& [name, table] : db.tables()) {
    if (table.tuples.empty()) out << "% " << name << "/" << table.arity << " is empty\n";
    for (const auto& t : table.tuples) {
      out << name << "(";
      for (std::size_t i = 0; i < t.size(); ++i) out << (i ? "," : "") << print_constant(db.constant_name(t[i]));
      out << ").\n";
    }
  }
}

void write_csv_directory(const Database& db, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  for (const auto& [name, table] : db.tables()) {
    std::ofstream out(dir / (name + ".csv"), std::ios::binary);
    if (!out) throw Error("cannot write " + (dir / (name + ".csv")).string());
    for (const auto& t : table.tuples) {
      for (std::size_t i = 0; i < t.size(); ++i) out << (i ? "," : "") << csv_field(db.constant_name(t[i]));
      out << "\n";
    }
  }
}

}  // namespace sharpcq
