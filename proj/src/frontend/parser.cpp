#include <cctype>
#include <map>
#include <set>

#include "opsyn/frontend/ast.hpp"

namespace opsyn::frontend {

using namespace logic;

namespace {

enum class Tok { Ident, Number, Punct, End };

struct Token {
  Tok kind = Tok::End;
  std::string text;
  std::int64_t number = 0;
  SourceLoc loc;
};

[[noreturn]] void fail(SourceLoc loc, const std::string& rule, const std::string& msg) {
  throw CompileError({make_error(loc, rule, msg)});
}

bool ident_start(char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_'; }
bool ident_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; }

class Lexer {
 public:
  Lexer(const std::string& src, const std::map<std::string, std::string>& predefined) : src_(src) {
    for (const auto& [name, text] : predefined) {
      Lexer sub(text, {});
      std::vector<Token> toks;
      for (Token t = sub.raw(); t.kind != Tok::End; t = sub.raw()) toks.push_back(t);
      defines_[name] = toks;
      locked_.insert(name);
    }
  }

  std::vector<Token> run() {
    std::vector<Token> out;
    for (Token t = raw(); t.kind != Tok::End; t = raw()) expand(t, out, 0);
    Token end;
    end.loc = {line_, col_};
    out.push_back(end);
    return out;
  }

 private:
  void expand(const Token& t, std::vector<Token>& out, int depth) {
    if (t.kind == Tok::Ident) {
      auto it = defines_.find(t.text);
      if (it != defines_.end()) {
        if (depth > 32) fail(t.loc, "define", "recursive macro '" + t.text + "'");
        for (Token e : it->second) {
          e.loc = t.loc;
          expand(e, out, depth + 1);
        }
        return;
      }
    }
    out.push_back(t);
  }

  char peek(std::size_t ahead = 0) const { return pos_ + ahead < src_.size() ? src_[pos_ + ahead] : '\0'; }

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
      char c = peek();
      if (c == '\0') return;
      if (std::isspace(static_cast<unsigned char>(c))) {
        advance();
      } else if (c == '/' && peek(1) == '/') {
        while (peek() != '\0' && peek() != '\n') advance();
      } else if (c == '/' && peek(1) == '*') {
        SourceLoc start{line_, col_};
        advance();
        advance();
        while (!(peek() == '*' && peek(1) == '/')) {
          if (peek() == '\0') fail(start, "syntax", "unterminated comment");
          advance();
        }
        advance();
        advance();
      } else if (c == '#') {
        directive();
      } else {
        return;
      }
    }
  }

  void directive() {
    SourceLoc loc{line_, col_};
    std::size_t eol = src_.find('\n', pos_);
    if (eol == std::string::npos) eol = src_.size();
    std::string line = src_.substr(pos_, eol - pos_);
    while (pos_ < eol) advance();
    std::size_t i = 1;
    while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
    std::size_t kw = i;
    while (i < line.size() && ident_char(line[i])) ++i;
    if (line.substr(kw, i - kw) != "define")
      fail(loc, "unsupported", "preprocessor directive '" + line + "' is not supported");
    while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
    std::size_t name_start = i;
    while (i < line.size() && ident_char(line[i])) ++i;
    std::string name = line.substr(name_start, i - name_start);
    if (name.empty()) fail(loc, "define", "#define without a name");
    if (i < line.size() && line[i] == '(') fail(loc, "unsupported", "macros with arguments are not supported");
    if (locked_.count(name)) return;
    Lexer sub(line.substr(i), {});
    std::vector<Token> toks;
    for (Token t = sub.raw(); t.kind != Tok::End; t = sub.raw()) {
      t.loc = loc;
      toks.push_back(t);
    }
    defines_[name] = toks;
  }

  Token raw() {
    skip_space();
    Token t;
    t.loc = {line_, col_};
    char c = peek();
    if (c == '\0') return t;
    if (ident_start(c)) {
      std::size_t start = pos_;
      while (ident_char(peek())) advance();
      t.kind = Tok::Ident;
      t.text = src_.substr(start, pos_ - start);
      return t;
    }
    if (std::isdigit(static_cast<unsigned char>(c))) {
      std::size_t start = pos_;
      while (std::isdigit(static_cast<unsigned char>(peek()))) advance();
      t.kind = Tok::Number;
      t.text = src_.substr(start, pos_ - start);
      try {
        t.number = std::stoll(t.text);
      } catch (const std::exception&) {
        fail(t.loc, "syntax", "integer literal out of range");
      }
      return t;
    }
    t.kind = Tok::Punct;
    auto take = [&](std::size_t n) {
      t.text = src_.substr(pos_, n);
      for (std::size_t k = 0; k < n; ++k) advance();
      return t;
    };
    auto word_op = [&](std::size_t dashes) {
      // -X / --X only when X is not the start of a longer identifier
      return peek(dashes) == 'X' && !ident_char(peek(dashes + 1));
    };
    switch (c) {
      case '-':
        if (peek(1) == '-' && word_op(2)) return take(3);
        if (word_op(1)) return take(2);
        if (peek(1) == '>') return take(2);
        if (peek(1) == '-') fail(t.loc, "unsupported", "decrement '--' is not supported");
        return take(1);
      case '<':
        if (peek(1) == '-' && peek(2) == '>') return take(3);
        if (peek(1) == '=' || peek(1) == '>') return take(2);
        return take(1);
      case '>':
        if (peek(1) == '=') return take(2);
        return take(1);
      case '=':
      case '!':
        if (peek(1) == '=') return take(2);
        return take(1);
      case '&':
        if (peek(1) == '&') return take(2);
        fail(t.loc, "unsupported", "bitwise '&' is not supported");
      case '|':
        if (peek(1) == '|') return take(2);
        fail(t.loc, "unsupported", "bitwise '|' is not supported");
      case ':':
        if (peek(1) == ':') return take(2);
        return take(1);
      case '[':
        if (peek(1) == ']') return take(2);
        return take(1);
      case '+':
        if (peek(1) == '+') fail(t.loc, "unsupported", "increment '++' is not supported");
        return take(1);
      case ']': case '(': case ')': case '{': case '}': case ';': case ',': case '\'':
        return take(1);
      case '*': case '/': case '%':
        fail(t.loc, "unsupported", std::string("operator '") + c + "' is not supported");
      case '?':
        fail(t.loc, "unsupported", "channels are not supported");
      default:
        fail(t.loc, "syntax", std::string("unexpected character '") + c + "'");
    }
  }

  std::string src_;
  std::size_t pos_ = 0;
  int line_ = 1;
  int col_ = 1;
  std::map<std::string, std::vector<Token>> defines_;
  std::set<std::string> locked_;
};

const std::set<std::string> kUnsupported = {"run",   "call",   "return", "chan",   "d_step", "unless",
                                            "printf", "timeout", "init",  "never",  "typedef", "mtype",
                                            "inline", "provided", "priority", "c_code", "c_expr", "xr", "xs"};

class Parser {
 public:
  explicit Parser(std::vector<Token> toks) : toks_(std::move(toks)) {}

  SpecAst run() {
    while (!at_end()) {
      if (starts_decl()) {
        parse_decl(ast_.globals, std::nullopt, std::nullopt);
      } else {
        Unit u = parse_unit(false);
        ast_.units.push_back(u);
      }
    }
    return std::move(ast_);
  }

 private:
  const Token& cur() const { return toks_[pos_]; }
  const Token& ahead(std::size_t n) const { return toks_[std::min(pos_ + n, toks_.size() - 1)]; }
  bool at_end() const { return cur().kind == Tok::End; }
  bool is(const char* p) const { return cur().kind == Tok::Punct && cur().text == p; }
  bool is_kw(const char* w) const { return cur().kind == Tok::Ident && cur().text == w; }

  std::string describe(const Token& t) const {
    if (t.kind == Tok::End) return "end of input";
    return "'" + t.text + "'";
  }

  [[noreturn]] void expected(const std::string& what) const {
    fail(cur().loc, "syntax", "expected " + what + ", found " + describe(cur()));
  }

  void expect(const char* p) {
    if (!is(p)) expected(std::string("'") + p + "'");
    ++pos_;
  }
  void expect_kw(const char* w) {
    if (!is_kw(w)) expected(std::string("'") + w + "'");
    ++pos_;
  }
  bool accept(const char* p) {
    if (!is(p)) return false;
    ++pos_;
    return true;
  }
  bool accept_kw(const char* w) {
    if (!is_kw(w)) return false;
    ++pos_;
    return true;
  }

  std::string ident() {
    if (cur().kind != Tok::Ident) expected("identifier");
    check_supported();
    return toks_[pos_++].text;
  }

  void check_supported() const {
    if (cur().kind == Tok::Ident && kUnsupported.count(cur().text))
      fail(cur().loc, "unsupported", "'" + cur().text + "' is not supported");
  }

  static bool is_type_word(const std::string& w) {
    return w == "bool" || w == "bit" || w == "byte" || w == "int" || w == "unsigned" || w == "signed" ||
           w == "short";
  }

  bool starts_decl() const {
    if (cur().kind != Tok::Ident) return false;
    const std::string& w = cur().text;
    if (w == "free" || is_type_word(w)) return true;
    if (w == "env" || w == "sys") {
      const Token& n = ahead(1);
      return n.kind == Tok::Ident && (n.text == "free" || is_type_word(n.text));
    }
    return false;
  }

  std::int64_t const_expr() {
    SourceLoc loc = cur().loc;
    Formula f = parse_expr(true, false);
    auto v = eval_const(f);
    if (!v) fail(loc, "syntax", "expected a constant expression");
    return *v;
  }

  static std::optional<std::int64_t> eval_const(const Formula& f) {
    switch (f->op) {
      case Op::IntConst:
      case Op::BoolConst: return f->value;
      case Op::Neg: {
        auto a = eval_const(f->args[0]);
        if (!a) return std::nullopt;
        return -*a;
      }
      case Op::Add:
      case Op::Sub: {
        auto a = eval_const(f->args[0]);
        auto b = eval_const(f->args[1]);
        if (!a || !b) return std::nullopt;
        return f->op == Op::Add ? *a + *b : *a - *b;
      }
      default: return std::nullopt;
    }
  }

  // [free] [env|sys] type declarator {, declarator} ;
  void parse_decl(std::vector<VarDecl>& out, std::optional<int> scope, std::optional<Player> default_owner) {
    SourceLoc loc = cur().loc;
    bool is_free = false;
    std::optional<Player> owner;
    for (;;) {
      if (accept_kw("free")) {
        is_free = true;
      } else if (is_kw("env") || is_kw("sys")) {
        if (owner) fail(cur().loc, "syntax", "owner given twice");
        owner = cur().text == "env" ? Player::Env : Player::Sys;
        ++pos_;
      } else {
        break;
      }
    }
    if (!owner && !default_owner) fail(loc, "ownership", "global variable declarations need 'env' or 'sys'");
    if (cur().kind != Tok::Ident || !is_type_word(cur().text)) expected("type");
    std::string type = toks_[pos_++].text;
    Domain dom;
    bool bitfield = false;
    bool bitfield_signed = false;
    if (type == "bool") {
      dom = Domain::boolean();
    } else if (type == "bit") {
      dom = Domain::bit();
    } else if (type == "byte") {
      dom = Domain::byte();
    } else if (type == "int") {
      if (!is("(")) fail(loc, "unsupported", "plain 'int' is not supported, use int(MIN, MAX)");
      expect("(");
      std::int64_t lo = const_expr();
      expect(",");
      std::int64_t hi = const_expr();
      expect(")");
      if (lo > hi) fail(loc, "domain", "int(MIN, MAX) needs MIN <= MAX");
      dom = Domain::ranged(lo, hi);
    } else if (type == "unsigned" || type == "signed") {
      bitfield = true;
      bitfield_signed = type == "signed";
    } else {
      fail(loc, "unsupported", "type '" + type + "' is not supported");
    }
    for (;;) {
      VarDecl d;
      d.loc = cur().loc;
      d.name = ident();
      d.owner = owner ? *owner : *default_owner;
      d.kind = is_free ? VarKind::Declarative : VarKind::Imperative;
      d.scope_process = scope;
      if (accept("[")) {
        std::int64_t n = const_expr();
        expect("]");
        if (n < 1) fail(d.loc, "domain", "array length must be positive");
        d.array_length = static_cast<int>(n);
      }
      if (bitfield) {
        expect(":");
        std::int64_t w = const_expr();
        if (w < 1 || w > 32) fail(d.loc, "domain", "bitfield width must be between 1 and 32");
        d.domain = Domain::bitfield(static_cast<int>(w), bitfield_signed);
      } else {
        d.domain = dom;
      }
      if (accept("=")) d.initial = const_expr();
      out.push_back(d);
      if (!accept(",")) break;
    }
    expect(";");
  }

  Unit parse_unit(bool in_product) {
    check_supported();
    SourceLoc loc = cur().loc;
    if (is_kw("sync") || is_kw("async")) {
      Product p;
      p.sync = cur().text == "sync";
      p.loc = loc;
      ++pos_;
      expect("{");
      while (!is("}")) {
        if (at_end()) expected("'}'");
        p.members.push_back(parse_unit(true));
      }
      expect("}");
      if (p.members.empty()) fail(loc, "syntax", "empty product");
      ast_.products.push_back(std::move(p));
      return Unit{Unit::Kind::Product, static_cast<int>(ast_.products.size()) - 1};
    }
    std::optional<Flavor> flavor;
    bool active = false;
    for (;;) {
      if (accept_kw("active")) {
        active = true;
      } else if (!flavor && is_kw("assume")) {
        flavor = Flavor::Assume;
        ++pos_;
      } else if (!flavor && is_kw("assert")) {
        flavor = Flavor::Assert;
        ++pos_;
      } else {
        break;
      }
    }
    if (is_kw("ltl")) {
      if (in_product) fail(loc, "syntax", "ltl blocks cannot appear inside products");
      if (active) fail(loc, "syntax", "'active' does not apply to ltl blocks");
      ++pos_;
      if (cur().kind == Tok::Ident) ++pos_;  // optional name
      expect("{");
      LtlBlock b;
      b.flavor = flavor.value_or(Flavor::Assert);
      b.loc = loc;
      b.formula = parse_expr(true, true);
      expect("}");
      ast_.ltl.push_back(std::move(b));
      return Unit{Unit::Kind::Ltl, static_cast<int>(ast_.ltl.size()) - 1};
    }
    Process p;
    p.loc = loc;
    p.active = active;
    if (!flavor) fail(loc, "syntax", "expected 'assume' or 'assert' before proctype");
    p.flavor = *flavor;
    p.pc_owner = constrained_player(p.flavor);
    if (is_kw("env") || is_kw("sys")) {
      p.pc_owner = cur().text == "env" ? Player::Env : Player::Sys;
      p.pc_owner_explicit = true;
      ++pos_;
    }
    expect_kw("proctype");
    p.name = ident();
    expect("(");
    expect(")");
    p.pid = static_cast<int>(ast_.processes.size());
    cur_process_ = &p;
    next_stmt_id_ = 0;
    expect("{");
    p.body = parse_sequence();
    expect("}");
    cur_process_ = nullptr;
    ast_.processes.push_back(std::move(p));
    return Unit{Unit::Kind::Process, static_cast<int>(ast_.processes.size()) - 1};
  }

  bool at_sequence_end() const {
    return is("}") || is_kw("od") || is_kw("fi") || is("::") || at_end();
  }

  Sequence parse_sequence() {
    Sequence seq;
    while (accept(";") || accept("->")) {
    }
    while (!at_sequence_end()) {
      if (starts_decl()) {
        if (!cur_process_) expected("statement");
        parse_decl(cur_process_->locals, cur_process_->pid, constrained_player(cur_process_->flavor));
        while (accept(";") || accept("->")) {
        }
        continue;
      }
      seq.push_back(parse_stmt());
      if (at_sequence_end()) break;
      if (!(is(";") || is("->"))) expected("';'");
      while (accept(";") || accept("->")) {
      }
    }
    return seq;
  }

  std::vector<Sequence> parse_options(const char* closer) {
    std::vector<Sequence> opts;
    while (accept("::")) opts.push_back(parse_sequence());
    if (opts.empty()) expected("'::'");
    expect_kw(closer);
    return opts;
  }

  StmtPtr parse_stmt() {
    check_supported();
    auto s = std::make_shared<Stmt>();
    s->loc = cur().loc;
    // labels
    while (cur().kind == Tok::Ident && ahead(1).kind == Tok::Punct && ahead(1).text == ":") {
      s->labels.push_back(toks_[pos_].text);
      pos_ += 2;
    }
    check_supported();
    if (accept_kw("if")) {
      s->kind = StmtKind::If;
      s->options = parse_options("fi");
    } else if (accept_kw("do")) {
      s->kind = StmtKind::Do;
      s->options = parse_options("od");
    } else if (accept_kw("else")) {
      s->kind = StmtKind::Else;
    } else if (accept_kw("break")) {
      s->kind = StmtKind::Break;
    } else if (accept_kw("goto")) {
      s->kind = StmtKind::Goto;
      s->target = ident();
    } else if (accept_kw("skip")) {
      s->kind = StmtKind::Expr;
      s->expr = make_bool(true);
    } else if (accept_kw("atomic")) {
      s->kind = StmtKind::Atomic;
      expect("{");
      s->body = parse_sequence();
      expect("}");
      if (s->body.empty()) fail(s->loc, "syntax", "empty atomic block");
    } else {
      Formula e = parse_expr(false, false);
      if (accept("=")) {
        if (e->op != Op::Var || e->primed) fail(s->loc, "syntax", "assignment target must be a variable");
        Formula value = parse_expr(false, false);
        Formula target = make_var(e->name, -1, true, e->args.empty() ? nullptr : e->args[0], e->loc);
        s->kind = StmtKind::Assign;
        s->expr = make_assign(target, value, s->loc);
      } else {
        s->kind = StmtKind::Expr;
        s->expr = e;
      }
    }
    s->id = next_stmt_id_++;
    return s;
  }

  // Expressions. `arrow` makes '->' an implication (it is a statement
  // separator at the top of a process statement).
  Formula parse_expr(bool arrow, bool ltl) {
    bool saved_arrow = arrow_, saved_ltl = ltl_;
    arrow_ = arrow;
    ltl_ = ltl;
    Formula f = parse_iff();
    arrow_ = saved_arrow;
    ltl_ = saved_ltl;
    return f;
  }

  Formula parse_iff() {
    Formula a = parse_implies();
    while (is("<->")) {
      SourceLoc loc = cur().loc;
      ++pos_;
      a = make_binary(Op::Iff, a, parse_implies(), loc);
    }
    return a;
  }

  Formula parse_implies() {
    Formula a = parse_or();
    if (arrow_ && is("->")) {
      SourceLoc loc = cur().loc;
      ++pos_;
      return make_binary(Op::Implies, a, parse_implies(), loc);
    }
    return a;
  }

  Formula parse_or() {
    Formula a = parse_and();
    while (is("||")) {
      SourceLoc loc = cur().loc;
      ++pos_;
      a = make_binary(Op::Or, a, parse_and(), loc);
    }
    return a;
  }

  Formula parse_and() {
    Formula a = parse_until();
    while (is("&&")) {
      SourceLoc loc = cur().loc;
      ++pos_;
      a = make_binary(Op::And, a, parse_until(), loc);
    }
    return a;
  }

  bool is_ltl_kw(const char* w) const { return ltl_ && is_kw(w); }

  Formula parse_until() {
    Formula a = parse_equality();
    while (is_ltl_kw("U") || is_ltl_kw("S")) {
      SourceLoc loc = cur().loc;
      Op op = cur().text == "U" ? Op::Until : Op::Since;
      ++pos_;
      a = make_binary(op, a, parse_equality(), loc);
    }
    return a;
  }

  Formula parse_equality() {
    Formula a = parse_relational();
    while (is("==") || is("!=")) {
      SourceLoc loc = cur().loc;
      Op op = cur().text == "==" ? Op::Eq : Op::Ne;
      ++pos_;
      a = make_binary(op, a, parse_relational(), loc);
    }
    return a;
  }

  Formula parse_relational() {
    Formula a = parse_additive();
    while (is("<") || is("<=") || is(">") || is(">=")) {
      SourceLoc loc = cur().loc;
      const std::string& t = cur().text;
      Op op = t == "<" ? Op::Lt : t == "<=" ? Op::Le : t == ">" ? Op::Gt : Op::Ge;
      ++pos_;
      a = make_binary(op, a, parse_additive(), loc);
    }
    return a;
  }

  Formula parse_additive() {
    Formula a = parse_unary();
    while (is("+") || is("-")) {
      SourceLoc loc = cur().loc;
      Op op = cur().text == "+" ? Op::Add : Op::Sub;
      ++pos_;
      a = make_binary(op, a, parse_unary(), loc);
    }
    return a;
  }

  Formula parse_unary() {
    SourceLoc loc = cur().loc;
    if (is("-") && ahead(1).kind == Tok::Number) {
      ++pos_;
      std::int64_t v = cur().number;
      ++pos_;
      return postfix(make_int(-v));
    }
    static const std::map<std::string, Op> prefix = {
        {"!", Op::Not}, {"-", Op::Neg}, {"[]", Op::Always}, {"<>", Op::Eventually}, {"-X", Op::WeakPrev},
        {"--X", Op::Prev}};
    if (cur().kind == Tok::Punct) {
      auto it = prefix.find(cur().text);
      if (it != prefix.end()) {
        ++pos_;
        return make_unary(it->second, parse_unary(), loc);
      }
    }
    if (is_ltl_kw("X") || is_ltl_kw("O") || is_ltl_kw("H")) {
      Op op = cur().text == "X" ? Op::Next : cur().text == "O" ? Op::Once : Op::Historically;
      ++pos_;
      return make_unary(op, parse_unary(), loc);
    }
    return postfix(parse_primary());
  }

  Formula postfix(Formula f) {
    while (is("'")) {
      SourceLoc loc = cur().loc;
      ++pos_;
      f = make_unary(Op::Prime, f, loc);
    }
    return f;
  }

  Formula parse_primary() {
    SourceLoc loc = cur().loc;
    if (cur().kind == Tok::Number) {
      std::int64_t v = cur().number;
      ++pos_;
      return make_int(v);
    }
    if (accept("(")) {
      bool saved = arrow_;
      arrow_ = true;
      Formula e = parse_iff();
      if (is(":")) {
        if (e->op != Op::Implies) expected("')'");
        ++pos_;
        Formula other = parse_iff();
        e = make_ite(e->args[0], e->args[1], other);
      }
      arrow_ = saved;
      expect(")");
      return e;
    }
    if (accept_kw("true")) return make_bool(true);
    if (accept_kw("false")) return make_bool(false);
    if (cur().kind != Tok::Ident) expected("expression");
    static const std::set<std::string> reserved = {"if", "fi", "do", "od", "else", "break", "goto", "skip",
                                                   "atomic", "proctype", "assume", "assert", "active",
                                                   "sync", "async", "ltl", "free", "env", "sys"};
    if (reserved.count(cur().text)) expected("expression");
    std::string name = ident();
    bool primed = accept("'");
    Formula index;
    if (accept("[")) {
      bool saved = arrow_;
      arrow_ = true;
      index = parse_iff();
      arrow_ = saved;
      expect("]");
    }
    return make_var(name, -1, primed, index, loc);
  }

  std::vector<Token> toks_;
  std::size_t pos_ = 0;
  SpecAst ast_;
  Process* cur_process_ = nullptr;
  int next_stmt_id_ = 0;
  bool arrow_ = false;
  bool ltl_ = false;
};

}  // namespace

SpecAst parse(const std::string& source, const std::map<std::string, std::string>& defines) {
  Lexer lexer(source, defines);
  Parser parser(lexer.run());
  return parser.run();
}

}  // namespace opsyn::frontend
