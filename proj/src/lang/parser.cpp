#include "mantis/lang/parser.hpp"

#include <cctype>
#include <charconv>
#include <fstream>
#include <sstream>
#include <unordered_map>

namespace mantis::lang {

SyntaxError::SyntaxError(SourceLoc loc, const std::string &message)
    : UserError("syntax error at " + std::to_string(loc.line) + ":" +
                std::to_string(loc.column) + ": " + message),
      loc_(loc) {}

namespace {

std::string join_diagnostics(const std::vector<Diagnostic> &ds) {
  std::string out;
  for (const auto &d : ds) {
    if (!out.empty()) out += "\n";
    out += to_string(d);
  }
  return out;
}

} // namespace

CheckError::CheckError(std::vector<Diagnostic> diagnostics)
    : UserError(join_diagnostics(diagnostics)),
      diagnostics_(std::move(diagnostics)) {}

namespace {

enum class Tok {
  End, Ident, Int, Float,
  LParen, RParen, LBrace, RBrace, LBracket, RBracket,
  Comma, Semi, DotDot, Arrow, At,
  Plus, Minus, Star, Slash, Percent,
  Lt, Le, Gt, Ge, EqEq, Ne, AndAnd, OrOr, Bang, Assign,
};

struct Token {
  Tok kind = Tok::End;
  std::string text;
  SourceLoc loc;
};

class Lexer {
public:
  explicit Lexer(std::string_view src) : src_(src) {}

  std::vector<Token> run() {
    std::vector<Token> out;
    for (;;) {
      skip_space();
      Token t;
      t.loc = {line_, col_};
      if (pos_ >= src_.size()) {
        t.kind = Tok::End;
        out.push_back(t);
        return out;
      }
      const char c = src_[pos_];
      if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
        std::size_t start = pos_;
        while (pos_ < src_.size() &&
               (std::isalnum(static_cast<unsigned char>(src_[pos_])) ||
                src_[pos_] == '_'))
          advance();
        t.kind = Tok::Ident;
        t.text = std::string(src_.substr(start, pos_ - start));
      } else if (std::isdigit(static_cast<unsigned char>(c))) {
        lex_number(t);
      } else {
        lex_punct(t);
      }
      out.push_back(std::move(t));
    }
  }

private:
  std::string_view src_;
  std::size_t pos_ = 0;
  int line_ = 1;
  int col_ = 1;

  char peek(std::size_t off = 0) const {
    return pos_ + off < src_.size() ? src_[pos_ + off] : '\0';
  }

  void advance() {
    if (src_[pos_] == '\n') {
      ++line_;
      col_ = 1;
    } else {
      ++col_;
    }
    ++pos_;
  }

  void skip_space() {
    for (;;) {
      while (pos_ < src_.size() &&
             std::isspace(static_cast<unsigned char>(src_[pos_])))
        advance();
      if (peek() == '/' && peek(1) == '/') {
        while (pos_ < src_.size() && src_[pos_] != '\n')
          advance();
        continue;
      }
      if (peek() == '/' && peek(1) == '*') {
        SourceLoc start{line_, col_};
        advance();
        advance();
        while (pos_ < src_.size() && !(peek() == '*' && peek(1) == '/'))
          advance();
        if (pos_ >= src_.size())
          throw SyntaxError(start, "unterminated block comment");
        advance();
        advance();
        continue;
      }
      return;
    }
  }

  void lex_number(Token &t) {
    std::size_t start = pos_;
    bool is_float = false;
    while (std::isdigit(static_cast<unsigned char>(peek())))
      advance();
    if (peek() == '.' && std::isdigit(static_cast<unsigned char>(peek(1)))) {
      is_float = true;
      advance();
      while (std::isdigit(static_cast<unsigned char>(peek())))
        advance();
    }
    if (peek() == 'e' || peek() == 'E') {
      std::size_t save = pos_;
      int save_col = col_;
      advance();
      if (peek() == '+' || peek() == '-') advance();
      if (std::isdigit(static_cast<unsigned char>(peek()))) {
        is_float = true;
        while (std::isdigit(static_cast<unsigned char>(peek())))
          advance();
      } else {
        pos_ = save;
        col_ = save_col;
      }
    }
    t.kind = is_float ? Tok::Float : Tok::Int;
    t.text = std::string(src_.substr(start, pos_ - start));
  }

  void lex_punct(Token &t) {
    const char c = peek();
    const char n = peek(1);
    auto two = [&](Tok k) {
      t.kind = k;
      t.text = std::string{c, n};
      advance();
      advance();
    };
    auto one = [&](Tok k) {
      t.kind = k;
      t.text = std::string{c};
      advance();
    };
    switch (c) {
    case '(': return one(Tok::LParen);
    case ')': return one(Tok::RParen);
    case '{': return one(Tok::LBrace);
    case '}': return one(Tok::RBrace);
    case '[': return one(Tok::LBracket);
    case ']': return one(Tok::RBracket);
    case ',': return one(Tok::Comma);
    case ';': return one(Tok::Semi);
    case '@': return one(Tok::At);
    case '+': return one(Tok::Plus);
    case '*': return one(Tok::Star);
    case '/': return one(Tok::Slash);
    case '%': return one(Tok::Percent);
    case '.':
      if (n == '.') return two(Tok::DotDot);
      break;
    case '-':
      if (n == '>') return two(Tok::Arrow);
      return one(Tok::Minus);
    case '<':
      if (n == '=') return two(Tok::Le);
      return one(Tok::Lt);
    case '>':
      if (n == '=') return two(Tok::Ge);
      return one(Tok::Gt);
    case '=':
      if (n == '=') return two(Tok::EqEq);
      return one(Tok::Assign);
    case '!':
      if (n == '=') return two(Tok::Ne);
      return one(Tok::Bang);
    case '&':
      if (n == '&') return two(Tok::AndAnd);
      break;
    case '|':
      if (n == '|') return two(Tok::OrOr);
      break;
    default:
      break;
    }
    throw SyntaxError({line_, col_}, std::string("unexpected character '") +
                                         c + "'");
  }
};

const std::unordered_map<std::string, Builtin> &builtins() {
  static const std::unordered_map<std::string, Builtin> table = {
      {"read", Builtin::Read},   {"readInt", Builtin::ReadInt},
      {"eof", Builtin::Eof},     {"len", Builtin::Len},
      {"toInt", Builtin::ToInt}, {"toFloat", Builtin::ToFloat},
  };
  return table;
}

bool is_keyword(const std::string &s) {
  static const char *const kw[] = {
      "global", "fn",    "int",    "float", "bool",  "if",   "else",
      "while",  "for",   "in",     "return", "print", "work", "fail",
      "try",    "rescue", "new",   "true",  "false"};
  for (const char *k : kw)
    if (s == k) return true;
  return builtins().count(s) > 0;
}

class Parser {
public:
  explicit Parser(std::vector<Token> toks) : toks_(std::move(toks)) {}

  Program program() {
    Program p;
    while (!at(Tok::End)) {
      if (at_word("global")) {
        p.globals.push_back(global());
      } else if (at_word("fn")) {
        p.functions.push_back(function());
      } else {
        fail_here("expected 'global' or 'fn'");
      }
    }
    return p;
  }

private:
  std::vector<Token> toks_;
  std::size_t pos_ = 0;

  const Token &cur() const { return toks_[pos_]; }
  const Token &ahead(std::size_t k) const {
    return toks_[std::min(pos_ + k, toks_.size() - 1)];
  }
  bool at(Tok k) const { return cur().kind == k; }
  bool at_word(const char *w) const {
    return cur().kind == Tok::Ident && cur().text == w;
  }
  bool at_type() const {
    return at_word("int") || at_word("float") || at_word("bool");
  }

  [[noreturn]] void fail_here(const std::string &what) const {
    const Token &t = cur();
    std::string found = t.kind == Tok::End ? "end of input" : "'" + t.text + "'";
    throw SyntaxError(t.loc, what + ", found " + found);
  }

  Token expect(Tok k, const char *what) {
    if (!at(k)) fail_here(std::string("expected ") + what);
    return toks_[pos_++];
  }

  void expect_word(const char *w) {
    if (!at_word(w)) fail_here(std::string("expected '") + w + "'");
    ++pos_;
  }

  std::string ident(const char *what) {
    if (!at(Tok::Ident) || is_keyword(cur().text))
      fail_here(std::string("expected ") + what);
    return toks_[pos_++].text;
  }

  BaseType base_type() {
    if (at_word("int")) { ++pos_; return BaseType::Int; }
    if (at_word("float")) { ++pos_; return BaseType::Float; }
    if (at_word("bool")) { ++pos_; return BaseType::Bool; }
    fail_here("expected a type");
  }

  static std::int64_t parse_int(const Token &t) {
    std::int64_t v = 0;
    auto [p, ec] = std::from_chars(t.text.data(), t.text.data() + t.text.size(), v);
    if (ec != std::errc() || p != t.text.data() + t.text.size())
      throw SyntaxError(t.loc, "integer literal out of range: " + t.text);
    return v;
  }

  static double parse_float(const Token &t) {
    double v = 0;
    auto [p, ec] = std::from_chars(t.text.data(), t.text.data() + t.text.size(), v);
    if (ec != std::errc() || p != t.text.data() + t.text.size())
      throw SyntaxError(t.loc, "bad float literal: " + t.text);
    return v;
  }

  GlobalDecl global() {
    GlobalDecl g;
    g.loc = cur().loc;
    expect_word("global");
    BaseType b = base_type();
    if (at(Tok::LBracket)) {
      ++pos_;
      Token size = expect(Tok::Int, "array size");
      expect(Tok::RBracket, "']'");
      g.type = Type::array_of(b);
      g.array_size = parse_int(size);
      g.name = ident("global name");
      expect(Tok::Semi, "';'");
      return g;
    }
    g.type = Type::scalar(b);
    g.name = ident("global name");
    if (at(Tok::Assign)) {
      ++pos_;
      g.init = literal();
    }
    expect(Tok::Semi, "';'");
    return g;
  }

  Literal literal() {
    Literal lit;
    bool neg = false;
    if (at(Tok::Minus)) {
      neg = true;
      ++pos_;
    }
    if (at(Tok::Int)) {
      lit.type = BaseType::Int;
      lit.int_value = parse_int(toks_[pos_++]);
      if (neg) lit.int_value = -lit.int_value;
    } else if (at(Tok::Float)) {
      lit.type = BaseType::Float;
      lit.float_value = parse_float(toks_[pos_++]);
      if (neg) lit.float_value = -lit.float_value;
    } else if (!neg && (at_word("true") || at_word("false"))) {
      lit.type = BaseType::Bool;
      lit.bool_value = at_word("true");
      ++pos_;
    } else {
      fail_here("expected a literal");
    }
    return lit;
  }

  FunctionDef function() {
    FunctionDef f;
    f.loc = cur().loc;
    expect_word("fn");
    f.name = ident("function name");
    expect(Tok::LParen, "'('");
    if (!at(Tok::RParen)) {
      for (;;) {
        Param p;
        p.loc = cur().loc;
        BaseType b = base_type();
        p.type = Type::scalar(b);
        if (at(Tok::LBracket)) {
          ++pos_;
          expect(Tok::RBracket, "']'");
          p.type = Type::array_of(b);
        }
        p.name = ident("parameter name");
        f.params.push_back(std::move(p));
        if (!at(Tok::Comma)) break;
        ++pos_;
      }
    }
    expect(Tok::RParen, "')'");
    f.return_type = Type::scalar(BaseType::Void);
    if (at(Tok::Arrow)) {
      ++pos_;
      f.return_type = Type::scalar(base_type());
    }
    f.body = block();
    return f;
  }

  Block block() {
    expect(Tok::LBrace, "'{'");
    Block b;
    while (!at(Tok::RBrace)) {
      if (at(Tok::End)) fail_here("expected '}'");
      b.push_back(statement());
    }
    ++pos_;
    return b;
  }

  StmtPtr new_stmt(StmtKind kind, SourceLoc loc) {
    auto s = std::make_unique<Stmt>();
    s->kind = kind;
    s->loc = loc;
    return s;
  }

  StmtPtr keyword_call(StmtKind kind, SourceLoc loc) {
    ++pos_;
    auto s = new_stmt(kind, loc);
    expect(Tok::LParen, "'('");
    s->value = expr();
    expect(Tok::RParen, "')'");
    expect(Tok::Semi, "';'");
    return s;
  }

  StmtPtr statement() {
    const SourceLoc loc = cur().loc;
    if (at(Tok::At)) {
      ++pos_;
      if (!at_word("probe")) fail_here("expected 'probe' after '@'");
      ++pos_;
      auto s = statement();
      s->probe = true;
      return s;
    }
    if (at_type()) {
      auto s = new_stmt(StmtKind::VarDecl, loc);
      BaseType b = base_type();
      s->decl_type = Type::scalar(b);
      if (at(Tok::LBracket)) {
        ++pos_;
        expect(Tok::RBracket, "']'");
        s->decl_type = Type::array_of(b);
      }
      s->name = ident("variable name");
      if (at(Tok::Assign)) {
        ++pos_;
        s->value = expr();
      }
      expect(Tok::Semi, "';'");
      return s;
    }
    if (at_word("if")) return if_stmt();
    if (at_word("while")) {
      ++pos_;
      auto s = new_stmt(StmtKind::While, loc);
      expect(Tok::LParen, "'('");
      s->value = expr();
      expect(Tok::RParen, "')'");
      s->body = block();
      return s;
    }
    if (at_word("for")) {
      ++pos_;
      auto s = new_stmt(StmtKind::For, loc);
      s->name = ident("loop variable");
      expect_word("in");
      s->value = expr();
      expect(Tok::DotDot, "'..'");
      s->value2 = expr();
      s->body = block();
      return s;
    }
    if (at_word("return")) {
      ++pos_;
      auto s = new_stmt(StmtKind::Return, loc);
      if (!at(Tok::Semi)) s->value = expr();
      expect(Tok::Semi, "';'");
      return s;
    }
    if (at_word("print")) return keyword_call(StmtKind::Print, loc);
    if (at_word("work")) return keyword_call(StmtKind::Work, loc);
    if (at_word("fail")) return keyword_call(StmtKind::Fail, loc);
    if (at_word("try")) {
      ++pos_;
      auto s = new_stmt(StmtKind::Try, loc);
      s->body = block();
      expect_word("rescue");
      s->else_body = block();
      s->has_else = true;
      return s;
    }
    if (at(Tok::Ident) && !is_keyword(cur().text)) {
      if (ahead(1).kind == Tok::Assign) {
        auto s = new_stmt(StmtKind::Assign, loc);
        s->name = toks_[pos_].text;
        pos_ += 2;
        s->value = expr();
        expect(Tok::Semi, "';'");
        return s;
      }
      if (ahead(1).kind == Tok::LBracket) {
        auto s = new_stmt(StmtKind::Assign, loc);
        s->name = toks_[pos_].text;
        pos_ += 2;
        s->index = expr();
        expect(Tok::RBracket, "']'");
        expect(Tok::Assign, "'='");
        s->value = expr();
        expect(Tok::Semi, "';'");
        return s;
      }
    }
    auto s = new_stmt(StmtKind::ExprStmt, loc);
    s->value = expr();
    if (s->value->kind != ExprKind::Call && s->value->kind != ExprKind::Builtin)
      throw SyntaxError(loc, "expression statement must be a call");
    expect(Tok::Semi, "';'");
    return s;
  }

  StmtPtr if_stmt() {
    const SourceLoc loc = cur().loc;
    expect_word("if");
    auto s = new_stmt(StmtKind::If, loc);
    expect(Tok::LParen, "'('");
    s->value = expr();
    expect(Tok::RParen, "')'");
    s->body = block();
    if (at_word("else")) {
      ++pos_;
      s->has_else = true;
      if (at_word("if")) {
        s->else_body.push_back(if_stmt());
      } else {
        s->else_body = block();
      }
    }
    return s;
  }

  // Precedence climbing, loosest first.
  static int precedence(Tok k) {
    switch (k) {
    case Tok::OrOr: return 1;
    case Tok::AndAnd: return 2;
    case Tok::EqEq: case Tok::Ne: return 3;
    case Tok::Lt: case Tok::Le: case Tok::Gt: case Tok::Ge: return 4;
    case Tok::Plus: case Tok::Minus: return 5;
    case Tok::Star: case Tok::Slash: case Tok::Percent: return 6;
    default: return 0;
    }
  }

  static BinaryOp binary_op(Tok k) {
    switch (k) {
    case Tok::OrOr: return BinaryOp::Or;
    case Tok::AndAnd: return BinaryOp::And;
    case Tok::EqEq: return BinaryOp::Eq;
    case Tok::Ne: return BinaryOp::Ne;
    case Tok::Lt: return BinaryOp::Lt;
    case Tok::Le: return BinaryOp::Le;
    case Tok::Gt: return BinaryOp::Gt;
    case Tok::Ge: return BinaryOp::Ge;
    case Tok::Plus: return BinaryOp::Add;
    case Tok::Minus: return BinaryOp::Sub;
    case Tok::Star: return BinaryOp::Mul;
    case Tok::Slash: return BinaryOp::Div;
    default: return BinaryOp::Mod;
    }
  }

  ExprPtr expr(int min_prec = 1) {
    ExprPtr lhs = unary();
    for (;;) {
      const int prec = precedence(cur().kind);
      if (prec < min_prec || prec == 0) return lhs;
      const Token op = toks_[pos_++];
      ExprPtr rhs = expr(prec + 1);
      lhs = make_binary(binary_op(op.kind), std::move(lhs), std::move(rhs), op.loc);
    }
  }

  ExprPtr unary() {
    const SourceLoc loc = cur().loc;
    if (at(Tok::Minus)) {
      ++pos_;
      return make_unary(UnaryOp::Neg, unary(), loc);
    }
    if (at(Tok::Bang)) {
      ++pos_;
      return make_unary(UnaryOp::Not, unary(), loc);
    }
    return primary();
  }

  std::vector<ExprPtr> call_args() {
    expect(Tok::LParen, "'('");
    std::vector<ExprPtr> args;
    if (!at(Tok::RParen)) {
      for (;;) {
        args.push_back(expr());
        if (!at(Tok::Comma)) break;
        ++pos_;
      }
    }
    expect(Tok::RParen, "')'");
    return args;
  }

  ExprPtr primary() {
    const Token t = cur();
    switch (t.kind) {
    case Tok::Int:
      ++pos_;
      return make_int(parse_int(t), t.loc);
    case Tok::Float:
      ++pos_;
      return make_float(parse_float(t), t.loc);
    case Tok::LParen: {
      ++pos_;
      auto e = expr();
      expect(Tok::RParen, "')'");
      return e;
    }
    case Tok::Ident:
      break;
    default:
      fail_here("expected an expression");
    }
    if (t.text == "true" || t.text == "false") {
      ++pos_;
      return make_bool(t.text == "true", t.loc);
    }
    if (t.text == "new") {
      ++pos_;
      auto e = std::make_unique<Expr>();
      e->kind = ExprKind::NewArray;
      e->loc = t.loc;
      e->elem_type = base_type();
      expect(Tok::LBracket, "'['");
      e->operands.push_back(expr());
      expect(Tok::RBracket, "']'");
      return e;
    }
    if (auto it = builtins().find(t.text); it != builtins().end()) {
      ++pos_;
      auto e = std::make_unique<Expr>();
      e->kind = ExprKind::Builtin;
      e->loc = t.loc;
      e->builtin = it->second;
      e->name = t.text;
      e->operands = call_args();
      return e;
    }
    if (is_keyword(t.text)) fail_here("expected an expression");
    ++pos_;
    if (at(Tok::LParen)) {
      auto e = std::make_unique<Expr>();
      e->kind = ExprKind::Call;
      e->loc = t.loc;
      e->name = t.text;
      e->operands = call_args();
      return e;
    }
    if (at(Tok::LBracket)) {
      ++pos_;
      auto e = std::make_unique<Expr>();
      e->kind = ExprKind::Index;
      e->loc = t.loc;
      e->name = t.text;
      e->operands.push_back(expr());
      expect(Tok::RBracket, "']'");
      return e;
    }
    return make_var(t.text, t.loc);
  }
};

} // namespace

Program parse_unchecked(std::string_view source) {
  Lexer lexer(source);
  Parser parser(lexer.run());
  return parser.program();
}

Program parse(std::string_view source) {
  Program p = parse_unchecked(source);
  check_or_throw(p);
  return p;
}

Program parse_file(const std::string &path) {
  std::ifstream in(path);
  if (!in) throw UserError("cannot open program file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse(ss.str());
}

} // namespace mantis::lang
