#include <algorithm>
#include <cctype>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include "wmmr/litmus.hpp"

namespace wmmr {

namespace {

enum class Tok { Ident, Int, Assign, LParen, RParen, LBrack, RBrack, Plus, Minus, Star,
                 Eq, Ne, Lt, Le, Gt, Ge, And, Or, Not, Colon, Comma, Newline, End };

struct Token {
  Tok kind;
  std::string text;
  Value value = 0;
  SourcePos pos;
};

std::vector<Token> tokenize(const std::string& src) {
  std::vector<Token> out;
  int line = 1;
  int col = 1;
  std::size_t i = 0;
  auto push = [&](Tok k, std::string text, SourcePos p) { out.push_back({k, std::move(text), 0, p}); };
  while (i < src.size()) {
    char c = src[i];
    SourcePos p{line, col};
    if (c == '\n') {
      push(Tok::Newline, "\\n", p);
      ++i;
      ++line;
      col = 1;
      continue;
    }
    if (c == '#' || (c == '/' && i + 1 < src.size() && src[i + 1] == '/')) {
      while (i < src.size() && src[i] != '\n') ++i;
      continue;
    }
    if (std::isspace(static_cast<unsigned char>(c))) {
      ++i;
      ++col;
      continue;
    }
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      std::size_t j = i;
      while (j < src.size() && (std::isalnum(static_cast<unsigned char>(src[j])) || src[j] == '_')) ++j;
      std::string word = src.substr(i, j - i);
      push(Tok::Ident, word, p);
      col += static_cast<int>(j - i);
      i = j;
      continue;
    }
    if (std::isdigit(static_cast<unsigned char>(c))) {
      std::size_t j = i;
      while (j < src.size() && std::isdigit(static_cast<unsigned char>(src[j]))) ++j;
      Token t{Tok::Int, src.substr(i, j - i), 0, p};
      try {
        t.value = std::stoll(t.text);
      } catch (const std::out_of_range&) {
        throw ParseError("integer literal out of range", p);
      }
      out.push_back(t);
      col += static_cast<int>(j - i);
      i = j;
      continue;
    }
    auto two = src.substr(i, 2);
    auto emit2 = [&](Tok k) {
      push(k, two, p);
      i += 2;
      col += 2;
    };
    auto emit1 = [&](Tok k) {
      push(k, std::string(1, c), p);
      ++i;
      ++col;
    };
    if (two == ":=") { emit2(Tok::Assign); continue; }
    if (two == "!=") { emit2(Tok::Ne); continue; }
    if (two == "<=") { emit2(Tok::Le); continue; }
    if (two == ">=") { emit2(Tok::Ge); continue; }
    if (two == "/\\" || two == "&&") { emit2(Tok::And); continue; }
    if (two == "\\/" || two == "||") { emit2(Tok::Or); continue; }
    if (two == "==") { emit2(Tok::Eq); continue; }
    switch (c) {
      case '(': emit1(Tok::LParen); continue;
      case ')': emit1(Tok::RParen); continue;
      case '[': emit1(Tok::LBrack); continue;
      case ']': emit1(Tok::RBrack); continue;
      case '+': emit1(Tok::Plus); continue;
      case '-': emit1(Tok::Minus); continue;
      case '*': emit1(Tok::Star); continue;
      case '=': emit1(Tok::Eq); continue;
      case '<': emit1(Tok::Lt); continue;
      case '>': emit1(Tok::Gt); continue;
      case '!': case '~': emit1(Tok::Not); continue;
      case ':': emit1(Tok::Colon); continue;
      case ',': emit1(Tok::Comma); continue;
      case ';': emit1(Tok::Newline); continue;
      default:
        throw ParseError(std::string("unexpected character '") + c + "'", p);
    }
  }
  out.push_back({Tok::Newline, "\\n", 0, {line, col}});
  out.push_back({Tok::End, "<end of input>", 0, {line, col}});
  return out;
}

class Parser {
 public:
  Parser(std::vector<Token> toks, std::string fallback) : toks_(std::move(toks)) { test_.name = std::move(fallback); }

  LitmusTest run() {
    skip_newlines();
    bool saw_exists = false;
    while (peek().kind != Tok::End) {
      const Token& t = peek();
      if (t.kind != Tok::Ident) throw ParseError("expected a section keyword, found '" + t.text + "'", t.pos);
      if (t.text == "test" || t.text == "name") {
        next();
        if (peek().kind == Tok::Colon) next();
        std::string name;
        while (peek().kind != Tok::Newline) name += next().text;
        if (name.empty()) throw ParseError("missing test name", t.pos);
        test_.name = name;
      } else if (t.text == "locations") {
        next();
        if (peek().kind == Tok::Colon) next();
        while (peek().kind != Tok::Newline) {
          if (peek().kind == Tok::Comma) { next(); continue; }
          const Token& id = expect(Tok::Ident, "location name");
          if (test_.find_loc(id.text)) throw ParseError("duplicate location '" + id.text + "'", id.pos);
          test_.locations.push_back(id.text);
        }
      } else if (t.text == "thread") {
        parse_thread();
        continue;
      } else if (t.text == "exists") {
        next();
        parse_outcome();
        saw_exists = true;
      } else if (t.text == "expected") {
        next();
        if (peek().kind == Tok::Colon) next();
        const Token& v = expect(Tok::Ident, "'reachable' or 'unreachable'");
        if (v.text == "reachable") test_.expected = Expected::Reachable;
        else if (v.text == "unreachable") test_.expected = Expected::Unreachable;
        else if (v.text == "unspecified") test_.expected = Expected::Unspecified;
        else throw ParseError("expected 'reachable' or 'unreachable', found '" + v.text + "'", v.pos);
      } else {
        throw ParseError("unknown section '" + t.text + "'", t.pos);
      }
      end_of_line();
    }
    if (test_.threads.empty()) throw ParseError("test has no threads", peek().pos);
    for (std::size_t i = 0; i < test_.threads.size(); ++i)
      if (test_.threads[i].tid != static_cast<Tid>(i + 1))
        throw ParseError("thread ids must be contiguous starting at 1", thread_pos_[test_.threads[i].tid]);
    if (!saw_exists) test_.outcome = Outcome{};
    resolve_outcome();
    return std::move(test_);
  }

 private:
  const Token& peek(std::size_t k = 0) const { return toks_[std::min(pos_ + k, toks_.size() - 1)]; }
  const Token& next() { return toks_[pos_ < toks_.size() - 1 ? pos_++ : pos_]; }

  const Token& expect(Tok k, const std::string& what) {
    const Token& t = peek();
    if (t.kind != k) throw ParseError("expected " + what + ", found '" + t.text + "'", t.pos);
    return next();
  }

  void skip_newlines() {
    while (peek().kind == Tok::Newline) next();
  }

  void end_of_line() {
    if (peek().kind != Tok::Newline && peek().kind != Tok::End)
      throw ParseError("unexpected '" + peek().text + "' at end of line", peek().pos);
    skip_newlines();
  }

  bool at_keyword(const char* kw) const { return peek().kind == Tok::Ident && peek().text == kw; }

  bool at_section() const {
    if (peek().kind == Tok::End) return true;
    if (peek().kind != Tok::Ident) return false;
    const std::string& w = peek().text;
    return w == "thread" || w == "exists" || w == "expected" || w == "locations" || w == "test" || w == "name";
  }

  void parse_thread() {
    const Token& kw = next();
    const Token& num = expect(Tok::Int, "thread number");
    expect(Tok::Colon, "':' after thread number");
    Tid tid = static_cast<Tid>(num.value);
    for (const auto& th : test_.threads)
      if (th.tid == tid) throw ParseError("duplicate thread " + std::to_string(tid), num.pos);
    current_ = tid;
    end_of_line();
    Stmt body = parse_block({});
    test_.threads.push_back({tid, body ? body : make_skip()});
    thread_pos_[tid] = kw.pos;
    std::sort(test_.threads.begin(), test_.threads.end(), [](const Thread& a, const Thread& b) { return a.tid < b.tid; });
  }

  // Parses statements until a section keyword or one of the terminators.
  Stmt parse_block(const std::vector<std::string>& terminators) {
    Stmt acc;
    while (!at_section()) {
      bool stop = false;
      for (const auto& t : terminators)
        if (at_keyword(t.c_str())) stop = true;
      if (stop) break;
      Stmt s = parse_statement();
      acc = acc ? make_seq(acc, s) : s;
    }
    if (!terminators.empty() && at_section())
      throw ParseError("unterminated block, expected 'end'", peek().pos);
    return acc ? acc : make_skip();
  }

  void expect_keyword(const char* kw) {
    if (!at_keyword(kw)) throw ParseError(std::string("expected '") + kw + "', found '" + peek().text + "'", peek().pos);
    next();
  }

  Stmt parse_statement() {
    const Token& t = peek();
    SourcePos p = t.pos;
    if (t.kind != Tok::Ident) throw ParseError("expected a statement, found '" + t.text + "'", p);
    Stmt s;
    if (t.text == "skip") {
      next();
      s = make_skip();
    } else if (t.text == "dmb" || t.text == "fence") {
      next();
      s = make_dmb();
    } else if (t.text == "assume" || t.text == "asm") {
      next();
      s = make_asm(parse_expr());
    } else if (t.text == "if") {
      next();
      Expr b = parse_expr();
      expect_keyword("then");
      end_of_line();
      Stmt s1 = parse_block({"else", "end"});
      Stmt s2 = make_skip();
      if (at_keyword("else")) {
        next();
        end_of_line();
        s2 = parse_block({"end"});
      }
      expect_keyword("end");
      s = make_choice(make_seq(make_asm(b), s1), make_seq(make_asm(make_not(b)), s2));
    } else if (t.text == "while") {
      next();
      Expr b = parse_expr();
      expect_keyword("do");
      end_of_line();
      Stmt body = parse_block({"end"});
      expect_keyword("end");
      s = make_seq(make_iterate(make_seq(make_asm(b), body)), make_asm(make_not(b)));
    } else if (t.text == "loop") {
      next();
      end_of_line();
      Stmt body = parse_block({"end"});
      expect_keyword("end");
      s = make_iterate(body);
    } else if (t.text == "choose") {
      next();
      end_of_line();
      std::vector<Stmt> branches{parse_block({"or", "end"})};
      while (at_keyword("or")) {
        next();
        end_of_line();
        branches.push_back(parse_block({"or", "end"}));
      }
      expect_keyword("end");
      s = branches.back();
      for (std::size_t i = branches.size() - 1; i-- > 0;) s = make_choice(branches[i], s);
    } else {
      s = parse_assignment();
    }
    end_of_line();
    return with_pos(s, p);
  }

  Stmt parse_assignment() {
    const Token& lhs = expect(Tok::Ident, "register or location");
    expect(Tok::Assign, "':='");
    if (auto x = test_.find_loc(lhs.text)) {
      const Token& v = peek();
      Operand rv;
      if (v.kind == Tok::Int) {
        rv.value = next().value;
      } else if (v.kind == Tok::Minus && peek(1).kind == Tok::Int) {
        next();
        rv.value = -next().value;
      } else if (v.kind == Tok::Ident && !test_.find_loc(v.text)) {
        rv.is_reg = true;
        rv.reg = reg_for(next());
      } else {
        throw ParseError("expected a constant or register as the stored value", v.pos);
      }
      return make_store(*x, rv);
    }
    RegId r = reg_for(lhs);
    if (peek().kind == Tok::Ident && test_.find_loc(peek().text) &&
        (peek(1).kind == Tok::Newline || peek(1).kind == Tok::End)) {
      LocId x = *test_.find_loc(next().text);
      return make_load(r, x);
    }
    if (peek().kind == Tok::Newline || peek().kind == Tok::End)
      throw ParseError("expected an expression after ':='", peek().pos);
    return make_assign(r, parse_expr());
  }

  RegId reg_for(const Token& t) {
    if (test_.find_loc(t.text)) throw ParseError("location '" + t.text + "' used where a register is expected", t.pos);
    static const std::set<std::string> reserved{"skip", "dmb", "fence", "assume", "asm", "if", "then", "else",
                                                "end", "while", "do", "loop", "choose", "or", "true", "false", "not"};
    if (reserved.count(t.text)) throw ParseError("'" + t.text + "' is a keyword", t.pos);
    if (auto r = test_.find_reg(t.text)) {
      Tid owner = test_.registers[*r].tid;
      if (owner != current_)
        throw ParseError("register '" + t.text + "' is used by threads " + std::to_string(owner) + " and " +
                             std::to_string(current_) + "; registers must be thread-local",
                         t.pos);
      return *r;
    }
    test_.registers.push_back({t.text, current_});
    return static_cast<RegId>(test_.registers.size() - 1);
  }

  Expr parse_expr() { return parse_or(); }

  Expr parse_or() {
    Expr e = parse_and();
    while (peek().kind == Tok::Or) {
      next();
      e = make_binary(Op::Or, e, parse_and());
    }
    return e;
  }

  Expr parse_and() {
    Expr e = parse_not();
    while (peek().kind == Tok::And) {
      next();
      e = make_binary(Op::And, e, parse_not());
    }
    return e;
  }

  Expr parse_not() {
    if (peek().kind == Tok::Not || at_keyword("not")) {
      next();
      return make_not(parse_not());
    }
    return parse_cmp();
  }

  Expr parse_cmp() {
    Expr e = parse_add();
    switch (peek().kind) {
      case Tok::Eq: next(); return make_binary(Op::Eq, e, parse_add());
      case Tok::Ne: next(); return make_binary(Op::Ne, e, parse_add());
      case Tok::Lt: next(); return make_binary(Op::Lt, e, parse_add());
      case Tok::Le: next(); return make_binary(Op::Le, e, parse_add());
      case Tok::Gt: next(); return make_binary(Op::Lt, parse_add(), e);
      case Tok::Ge: next(); return make_binary(Op::Le, parse_add(), e);
      default: return e;
    }
  }

  Expr parse_add() {
    Expr e = parse_mul();
    while (peek().kind == Tok::Plus || peek().kind == Tok::Minus) {
      Op op = next().kind == Tok::Plus ? Op::Add : Op::Sub;
      e = make_binary(op, e, parse_mul());
    }
    return e;
  }

  Expr parse_mul() {
    Expr e = parse_atom();
    while (peek().kind == Tok::Star) {
      next();
      e = make_binary(Op::Mul, e, parse_atom());
    }
    return e;
  }

  Expr parse_atom() {
    const Token& t = peek();
    switch (t.kind) {
      case Tok::Int:
        return make_const(next().value);
      case Tok::Minus:
        next();
        if (peek().kind == Tok::Int) return make_const(-next().value);
        return make_binary(Op::Sub, make_const(0), parse_atom());
      case Tok::LParen: {
        next();
        Expr e = parse_expr();
        expect(Tok::RParen, "')'");
        return e;
      }
      case Tok::Ident:
        if (t.text == "true") { next(); return make_const(1); }
        if (t.text == "false") { next(); return make_const(0); }
        if (test_.find_loc(t.text))
          throw ParseError("location '" + t.text + "' cannot appear in an expression; load it into a register first",
                           t.pos);
        return make_reg(reg_for(next()));
      default:
        throw ParseError("expected an expression, found '" + t.text + "'", t.pos);
    }
  }

  struct PendingAtom {
    bool is_loc;
    std::string name;
    Value value;
    SourcePos pos;
  };

  void parse_outcome() {
    bool paren = false;
    if (peek().kind == Tok::LParen) {
      next();
      paren = true;
    }
    if (!(paren && peek().kind == Tok::RParen) && !at_keyword("true")) {
      while (true) {
        PendingAtom a{};
        a.pos = peek().pos;
        if (peek().kind == Tok::LBrack) {
          next();
          a.is_loc = true;
          a.name = expect(Tok::Ident, "location name").text;
          expect(Tok::RBrack, "']'");
        } else {
          const Token& id = expect(Tok::Ident, "register name");
          a.name = id.text;
          // "x=1" for a declared location also refers to memory.
          a.is_loc = test_.find_loc(id.text).has_value();
          if (peek().kind == Tok::Colon) {  // tolerate "1:a" style prefixes
            next();
            a.name = expect(Tok::Ident, "register name").text;
            a.is_loc = false;
          }
        }
        expect(Tok::Eq, "'='");
        Value sign = 1;
        if (peek().kind == Tok::Minus) {
          next();
          sign = -1;
        }
        a.value = sign * expect(Tok::Int, "integer").value;
        pending_.push_back(a);
        if (peek().kind == Tok::And) {
          next();
          continue;
        }
        break;
      }
    } else if (at_keyword("true")) {
      next();
    }
    if (paren) expect(Tok::RParen, "')'");
  }

  void resolve_outcome() {
    for (const auto& a : pending_) {
      OutcomeAtom atom;
      atom.value = a.value;
      if (a.is_loc) {
        auto x = test_.find_loc(a.name);
        if (!x) throw ParseError("unknown location '" + a.name + "' in outcome", a.pos);
        atom.kind = OutcomeAtom::Kind::Loc;
        atom.id = *x;
      } else {
        auto r = test_.find_reg(a.name);
        if (!r) throw ParseError("unknown register '" + a.name + "' in outcome", a.pos);
        atom.kind = OutcomeAtom::Kind::Reg;
        atom.id = *r;
      }
      test_.outcome.atoms.push_back(atom);
    }
  }

  std::vector<Token> toks_;
  std::size_t pos_ = 0;
  LitmusTest test_;
  Tid current_ = 0;
  std::map<Tid, SourcePos> thread_pos_;
  std::vector<PendingAtom> pending_;
};

}  // namespace

LitmusTest parse_litmus(const std::string& text, const std::string& fallback_name) {
  return Parser(tokenize(text), fallback_name).run();
}

LitmusTest load_litmus_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_litmus(ss.str(), std::filesystem::path(path).stem().string());
}

std::vector<std::string> collect_litmus_paths(const std::vector<std::string>& paths) {
  namespace fs = std::filesystem;
  std::vector<std::string> out;
  for (const auto& p : paths) {
    if (fs::is_directory(p)) {
      std::vector<std::string> found;
      for (const auto& entry : fs::recursive_directory_iterator(p))
        if (entry.is_regular_file() && entry.path().extension() == ".lit") found.push_back(entry.path().string());
      std::sort(found.begin(), found.end());
      out.insert(out.end(), found.begin(), found.end());
    } else {
      out.push_back(p);
    }
  }
  return out;
}

}  // namespace wmmr
