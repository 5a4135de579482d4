#include "impverif/solver_io.hpp"

#include <atomic>
#include <cerrno>
#include <chrono>
#include <csignal>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <fcntl.h>
#include <poll.h>
#include <sys/wait.h>
#include <unistd.h>

namespace impverif {

namespace fs = std::filesystem;

SolverConfig SolverConfig::from_env() {
  SolverConfig c;
  if (const char* s = std::getenv("IMPVERIF_SMT_CMD"); s && *s) c.smt_cmd = s;
  if (const char* s = std::getenv("IMPVERIF_CHC_CMD"); s && *s) c.chc_cmd = s;
  return c;
}

namespace {
bool on_path(const std::string& prog) {
  const char* path = std::getenv("PATH");
  if (!path) return false;
  std::stringstream ss(path);
  std::string dir;
  while (std::getline(ss, dir, ':')) {
    if (dir.empty()) continue;
    if (::access((dir + "/" + prog).c_str(), X_OK) == 0) return true;
  }
  return false;
}
}  // namespace

std::string SolverConfig::effective_chc_cmd() const {
  if (!chc_cmd.empty()) return chc_cmd;
  static const std::string dflt = [] {
    if (on_path("hoice")) return std::string("hoice");
    std::error_code ec;
    auto self = std::filesystem::read_symlink("/proc/self/exe", ec);
    if (!ec) {
      auto sibling = self.parent_path() / "impverif-chc";
      if (std::filesystem::exists(sibling, ec)) return "'" + sibling.string() + "'";
    }
    if (on_path("impverif-chc")) return std::string("impverif-chc");
    return std::string("z3 fp.spacer.global=true");
  }();
  return dflt;
}

const char* verdict_name(SolverVerdict::Kind k) {
  switch (k) {
    case SolverVerdict::Kind::Sat: return "sat";
    case SolverVerdict::Kind::Unsat: return "unsat";
    case SolverVerdict::Kind::Unknown: return "unknown";
    case SolverVerdict::Kind::Error: return "error";
  }
  return "?";
}

// ---------------------------------------------------------------- printing

std::string smt_symbol(const std::string& name) {
  static const std::string extra = "~!@$%^&*_-+=<>.?/";
  bool simple = !name.empty() && !std::isdigit(static_cast<unsigned char>(name[0]));
  for (char c : name)
    if (!std::isalnum(static_cast<unsigned char>(c)) && extra.find(c) == std::string::npos) simple = false;
  return simple ? name : "|" + name + "|";
}

namespace {
std::string smt_int(const BigInt& n) { return n < 0 ? "(- " + BigInt(-n).str() + ")" : n.str(); }
}  // namespace

std::string smt_number(const Rational& r) {
  if (denominator(r) == 1) return smt_int(numerator(r));
  return "(/ " + smt_int(numerator(r)) + " " + denominator(r).str() + ")";
}

namespace {

bool needs_real(const Term& t, const SortMap& sorts) {
  for (const auto& [m, c] : t.monomials()) {
    if (denominator(c) != 1) return true;
    for (const auto& v : m) {
      auto it = sorts.find(v);
      if (it != sorts.end() && it->second == Sort::Real) return true;
    }
  }
  return false;
}

}  // namespace

std::string smt_term(const Term& t, const SortMap& sorts, bool as_real) {
  std::vector<std::string> parts;
  for (const auto& [m, c] : t.monomials()) {
    if (m.empty()) {
      parts.push_back(smt_number(c));
      continue;
    }
    std::vector<std::string> factors;
    if (c != 1) factors.push_back(smt_number(c));
    for (const auto& v : m) {
      auto it = sorts.find(v);
      bool is_int = it == sorts.end() || it->second == Sort::Int;
      factors.push_back(as_real && is_int ? "(to_real " + smt_symbol(v) + ")" : smt_symbol(v));
    }
    if (factors.size() == 1) {
      parts.push_back(factors[0]);
    } else {
      std::string s = "(*";
      for (const auto& f : factors) s += " " + f;
      parts.push_back(s + ")");
    }
  }
  if (parts.empty()) return "0";
  if (parts.size() == 1) return parts[0];
  std::string s = "(+";
  for (const auto& p : parts) s += " " + p;
  return s + ")";
}

std::string smt_formula(const Formula& f, const SortMap& sorts) {
  switch (f.kind()) {
    case Formula::Kind::True: return "true";
    case Formula::Kind::False: return "false";
    case Formula::Kind::Atom: {
      bool real = needs_real(f.lhs(), sorts) || needs_real(f.rhs(), sorts);
      std::string l = smt_term(f.lhs(), sorts, real), r = smt_term(f.rhs(), sorts, real);
      if (f.cmp() == Cmp::Ne) return "(not (= " + l + " " + r + "))";
      return std::string("(") + cmp_symbol(f.cmp()) + " " + l + " " + r + ")";
    }
    case Formula::Kind::Not: return "(not " + smt_formula(f.children()[0], sorts) + ")";
    case Formula::Kind::And:
    case Formula::Kind::Or:
    case Formula::Kind::Implies: {
      const auto& ch = f.children();
      if (ch.empty()) return f.kind() == Formula::Kind::Or ? "false" : "true";
      if (ch.size() == 1) return smt_formula(ch[0], sorts);
      std::string s = f.kind() == Formula::Kind::And ? "(and" : f.kind() == Formula::Kind::Or ? "(or" : "(=>";
      for (const auto& c : ch) s += " " + smt_formula(c, sorts);
      return s + ")";
    }
  }
  return "true";
}

std::string smt_declarations(const SortMap& sorts) {
  std::string s;
  for (const auto& [v, so] : sorts) s += "(declare-fun " + smt_symbol(v) + " () " + (so == Sort::Int ? "Int" : "Real") + ")\n";
  return s;
}

// ---------------------------------------------------------------- processes

ProcessResult run_command(const std::string& cmd, const std::string& file, double timeout_secs) {
  int out_pipe[2], err_pipe[2];
  if (::pipe(out_pipe) != 0 || ::pipe(err_pipe) != 0) throw SolverError("pipe failed");
  std::string line = "exec " + cmd + " '" + file + "'";
  pid_t pid = ::fork();
  if (pid < 0) throw SolverError("fork failed");
  if (pid == 0) {
    ::setpgid(0, 0);
    ::dup2(out_pipe[1], 1);
    ::dup2(err_pipe[1], 2);
    ::close(out_pipe[0]);
    ::close(err_pipe[0]);
    ::close(out_pipe[1]);
    ::close(err_pipe[1]);
    int devnull = ::open("/dev/null", O_RDONLY);
    if (devnull >= 0) ::dup2(devnull, 0);
    ::execl("/bin/sh", "sh", "-c", line.c_str(), static_cast<char*>(nullptr));
    ::_exit(127);
  }
  ::setpgid(pid, pid);
  ::close(out_pipe[1]);
  ::close(err_pipe[1]);

  ProcessResult r;
  auto deadline = std::chrono::steady_clock::now() + std::chrono::duration<double>(timeout_secs);
  pollfd fds[2] = {{out_pipe[0], POLLIN, 0}, {err_pipe[0], POLLIN, 0}};
  int open_fds = 2;
  char buf[65536];
  while (open_fds > 0) {
    auto left = std::chrono::duration_cast<std::chrono::milliseconds>(deadline - std::chrono::steady_clock::now());
    if (left.count() <= 0) {
      r.timed_out = true;
      break;
    }
    int n = ::poll(fds, 2, static_cast<int>(std::min<long long>(left.count(), 1000)));
    if (n < 0) {
      if (errno == EINTR) continue;
      break;
    }
    for (int k = 0; k < 2; ++k) {
      if (fds[k].fd < 0 || !(fds[k].revents & (POLLIN | POLLHUP | POLLERR))) continue;
      ssize_t got = ::read(fds[k].fd, buf, sizeof buf);
      if (got > 0) {
        (k == 0 ? r.out : r.err).append(buf, static_cast<size_t>(got));
      } else {
        ::close(fds[k].fd);
        fds[k].fd = -1;
        --open_fds;
      }
    }
  }
  if (r.timed_out) ::kill(-pid, SIGKILL);
  for (auto& p : fds)
    if (p.fd >= 0) ::close(p.fd);
  int status = 0;
  while (::waitpid(pid, &status, 0) < 0 && errno == EINTR) {
  }
  r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : 128 + (WIFSIGNALED(status) ? WTERMSIG(status) : 0);
  return r;
}

std::string write_scratch(const SolverConfig& cfg, const std::string& script) {
  static std::atomic<long> counter{0};
  fs::path dir = cfg.scratch_dir.empty() ? fs::temp_directory_path() / ("impverif-" + std::to_string(::getpid()))
                                         : fs::path(cfg.scratch_dir);
  fs::create_directories(dir);
  fs::path p = dir / (cfg.job + "-" + std::to_string(counter++) + ".smt2");
  std::ofstream out(p);
  if (!out) throw SolverError("cannot write " + p.string());
  out << script;
  return p.string();
}

void drop_scratch(const SolverConfig& cfg, const std::string& path) {
  if (cfg.keep_scratch) return;
  std::error_code ec;
  fs::remove(path, ec);
}

// ---------------------------------------------------------------- parsing

namespace {

std::string trim(const std::string& s) {
  size_t a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  size_t b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

std::string first_line(const std::string& s, std::string* rest = nullptr) {
  std::stringstream ss(s);
  std::string line;
  while (std::getline(ss, line)) {
    line = trim(line);
    if (line.empty()) continue;
    if (rest) {
      std::stringstream tail;
      tail << ss.rdbuf();
      *rest = tail.str();
    }
    return line;
  }
  return "";
}

class SexpReader {
 public:
  explicit SexpReader(const std::string& s) : s_(s) {}

  std::vector<Sexp> all() {
    std::vector<Sexp> out;
    while (skip(), i_ < s_.size()) {
      if (s_[i_] == ')') {
        ++i_;
        continue;
      }
      out.push_back(read());
    }
    return out;
  }

 private:
  const std::string& s_;
  size_t i_ = 0;

  void skip() {
    while (i_ < s_.size()) {
      if (std::isspace(static_cast<unsigned char>(s_[i_]))) {
        ++i_;
      } else if (s_[i_] == ';') {
        while (i_ < s_.size() && s_[i_] != '\n') ++i_;
      } else {
        break;
      }
    }
  }

  Sexp read() {
    skip();
    Sexp e;
    if (i_ >= s_.size()) return e;
    char c = s_[i_];
    if (c == '(') {
      ++i_;
      e.is_list = true;
      while (skip(), i_ < s_.size() && s_[i_] != ')') e.list.push_back(read());
      if (i_ < s_.size()) ++i_;
      return e;
    }
    if (c == '|' || c == '"') {
      size_t j = s_.find(c, i_ + 1);
      if (j == std::string::npos) j = s_.size();
      e.atom = s_.substr(i_ + 1, j - i_ - 1);
      i_ = std::min(j + 1, s_.size());
      return e;
    }
    size_t j = i_;
    while (j < s_.size() && !std::isspace(static_cast<unsigned char>(s_[j])) && s_[j] != '(' && s_[j] != ')') ++j;
    e.atom = s_.substr(i_, j - i_);
    i_ = j;
    return e;
  }
};

std::optional<Rational> parse_decimal(const std::string& a) {
  if (a.empty()) return std::nullopt;
  size_t dot = a.find('.');
  std::string whole = a.substr(0, dot), frac = dot == std::string::npos ? "" : a.substr(dot + 1);
  for (char c : whole + frac)
    if (!std::isdigit(static_cast<unsigned char>(c))) return std::nullopt;
  if (whole.empty()) whole = "0";
  BigInt num(whole + frac);
  BigInt den = 1;
  for (size_t k = 0; k < frac.size(); ++k) den *= 10;
  return Rational(num, den);
}

std::optional<Rational> eval_num(const Sexp& e) {
  if (!e.is_list) return parse_decimal(e.atom);
  if (e.list.empty() || e.list[0].is_list) return std::nullopt;
  const std::string& op = e.list[0].atom;
  std::vector<Rational> args;
  for (size_t k = 1; k < e.list.size(); ++k) {
    auto v = eval_num(e.list[k]);
    if (!v) return std::nullopt;
    args.push_back(*v);
  }
  if (args.empty()) return std::nullopt;
  if (op == "-") {
    if (args.size() == 1) return -args[0];
    Rational r = args[0];
    for (size_t k = 1; k < args.size(); ++k) r -= args[k];
    return r;
  }
  if (op == "+") {
    Rational r = 0;
    for (const auto& a : args) r += a;
    return r;
  }
  if (op == "*") {
    Rational r = 1;
    for (const auto& a : args) r *= a;
    return r;
  }
  if (op == "/" && args.size() == 2 && args[1] != 0) return args[0] / args[1];
  if (op == "to_real" && args.size() == 1) return args[0];
  return std::nullopt;
}

void collect_defs(const Sexp& e, Model& m) {
  if (!e.is_list) return;
  if (e.list.size() == 5 && !e.list[0].is_list && e.list[0].atom == "define-fun" && e.list[2].is_list &&
      e.list[2].list.empty()) {
    if (auto v = eval_num(e.list[4])) m[e.list[1].atom] = *v;
    return;
  }
  for (const auto& c : e.list) collect_defs(c, m);
}

}  // namespace

SolverVerdict parse_verdict(const ProcessResult& r) {
  SolverVerdict v;
  if (r.timed_out) {
    v.kind = SolverVerdict::Kind::Unknown;
    v.diagnostic = "timeout";
    return v;
  }
  std::string rest;
  std::string line = first_line(r.out, &rest);
  if (line == "sat") {
    v.kind = SolverVerdict::Kind::Sat;
    v.model_text = rest;
  } else if (line == "unsat") {
    v.kind = SolverVerdict::Kind::Unsat;
  } else if (line == "unknown" || (line.empty() && r.exit_code == 0)) {
    v.kind = SolverVerdict::Kind::Unknown;
    v.diagnostic = trim(r.err);
  } else {
    v.kind = r.exit_code != 0 || line.rfind("(error", 0) == 0 ? SolverVerdict::Kind::Error : SolverVerdict::Kind::Unknown;
    v.diagnostic = "exit " + std::to_string(r.exit_code) + ": " + trim(line.empty() ? r.err : line + "\n" + r.err);
  }
  return v;
}

std::vector<Sexp> parse_sexps(const std::string& text) { return SexpReader(text).all(); }

Model parse_model(const std::string& text) {
  Model m;
  for (const auto& e : SexpReader(text).all()) collect_defs(e, m);
  return m;
}

// ---------------------------------------------------------------- mini solver

namespace {

void collect_atoms(const Formula& f, std::vector<Formula>& out) {
  if (f.kind() == Formula::Kind::Atom) {
    out.push_back(f);
    return;
  }
  if (f.kind() == Formula::Kind::True || f.kind() == Formula::Kind::False) return;
  for (const auto& c : f.children()) collect_atoms(c, out);
}

BigInt floor_of(const Rational& r) {
  BigInt q = numerator(r) / denominator(r);
  if (r < 0 && q * denominator(r) != numerator(r)) q -= 1;
  return q;
}

}  // namespace

SatResult mini_solve(const Formula& f, const SortMap& sorts) {
  SatResult res;
  auto vars = f.free_vars();
  if (vars.empty()) {
    res.kind = f.evaluate({}) ? SolverVerdict::Kind::Sat : SolverVerdict::Kind::Unsat;
    return res;
  }
  if (vars.size() > 1) {
    res.diagnostic = "builtin solver handles at most one variable";
    return res;
  }
  const std::string x = *vars.begin();
  auto it = sorts.find(x);
  bool is_int = it == sorts.end() || it->second == Sort::Int;
  std::vector<Formula> atoms;
  collect_atoms(f, atoms);
  std::vector<Rational> crit;
  for (const auto& a : atoms) {
    Term d = a.lhs() - a.rhs();
    if (d.degree() > 1) {
      res.diagnostic = "builtin solver handles linear atoms only";
      return res;
    }
    Rational k = d.coeff(x);
    if (k != 0) crit.push_back(-d.constant_part() / k);
  }
  std::sort(crit.begin(), crit.end());
  std::vector<Rational> cand{0};
  for (size_t k = 0; k < crit.size(); ++k) {
    const Rational& c = crit[k];
    if (is_int) {
      BigInt fl = floor_of(c);
      for (BigInt d = -1; d <= 2; ++d) cand.push_back(Rational(fl + d));
    } else {
      cand.push_back(c);
      cand.push_back(c - 1);
      cand.push_back(c + 1);
      if (k + 1 < crit.size()) cand.push_back((c + crit[k + 1]) / 2);
    }
  }
  for (const auto& v : cand) {
    if (f.evaluate({{x, v}})) {
      res.kind = SolverVerdict::Kind::Sat;
      res.model[x] = v;
      return res;
    }
  }
  res.kind = SolverVerdict::Kind::Unsat;
  return res;
}

// ---------------------------------------------------------------- queries

namespace {

SortMap with_free_vars(const Formula& f, SortMap sorts) {
  for (const auto& v : f.free_vars()) sorts.emplace(v, Sort::Int);
  return sorts;
}

const char* kMarker = "@@impverif-end";

}  // namespace

std::vector<SatResult> check_sat_batch(const std::vector<Formula>& fs, const SortMap& sorts0,
                                       const SolverConfig& cfg) {
  std::vector<SatResult> out(fs.size());
  if (fs.empty()) return out;
  if (cfg.smt_cmd == "builtin") {
    for (size_t k = 0; k < fs.size(); ++k) out[k] = mini_solve(fs[k], with_free_vars(fs[k], sorts0));
    return out;
  }
  SortMap sorts = sorts0;
  for (const auto& f : fs) sorts = with_free_vars(f, std::move(sorts));
  std::string script = "(set-option :produce-models true)\n" + smt_declarations(sorts);
  for (const auto& f : fs) {
    script += "(push 1)\n(assert " + smt_formula(f, sorts) + ")\n(check-sat)\n(get-model)\n(pop 1)\n";
    script += std::string("(echo \"") + kMarker + "\")\n";
  }
  std::string path = write_scratch(cfg, script);
  ProcessResult pr = run_command(cfg.smt_cmd, path, cfg.timeout_secs);
  drop_scratch(cfg, path);

  size_t pos = 0;
  for (size_t k = 0; k < fs.size(); ++k) {
    size_t end = pr.out.find(kMarker, pos);
    if (end == std::string::npos) {
      std::string why = pr.timed_out ? "timeout" : "solver output ended early: " + trim(pr.err + pr.out.substr(pos));
      for (size_t j = k; j < fs.size(); ++j) {
        out[j].kind = pr.timed_out ? SolverVerdict::Kind::Unknown : SolverVerdict::Kind::Error;
        out[j].diagnostic = why;
      }
      break;
    }
    std::string chunk = pr.out.substr(pos, end - pos);
    pos = end + std::strlen(kMarker);
    std::string rest;
    std::string line = first_line(chunk, &rest);
    if (line == "sat") {
      out[k].kind = SolverVerdict::Kind::Sat;
      out[k].model = parse_model(rest);
    } else if (line == "unsat") {
      out[k].kind = SolverVerdict::Kind::Unsat;
    } else if (line == "unknown") {
      out[k].kind = SolverVerdict::Kind::Unknown;
    } else {
      out[k].kind = SolverVerdict::Kind::Error;
      out[k].diagnostic = trim(chunk);
    }
  }
  return out;
}

SatResult check_sat_qf(const Formula& f, const SortMap& sorts, const SolverConfig& cfg) {
  return check_sat_batch({f}, sorts, cfg)[0];
}

ValidityResult check_valid(const ValidityObligation& ob, const SolverConfig& cfg) {
  SortMap sorts;
  for (const auto& v : ob.scope) sorts[v] = Sort::Int;
  Formula neg = Formula::conj(ob.hypothesis, Formula::negate(ob.conclusion));
  SatResult s = check_sat_qf(neg, sorts, cfg);
  ValidityResult r;
  r.diagnostic = s.diagnostic;
  switch (s.kind) {
    case SolverVerdict::Kind::Unsat: r.kind = ValidityResult::Kind::Valid; break;
    case SolverVerdict::Kind::Sat:
      r.kind = ValidityResult::Kind::Invalid;
      r.counterexample = s.model;
      break;
    case SolverVerdict::Kind::Unknown: r.kind = ValidityResult::Kind::Unknown; break;
    case SolverVerdict::Kind::Error: throw SolverError(s.diagnostic);
  }
  return r;
}

SolverVerdict run_horn(const std::string& script, const SolverConfig& cfg) {
  std::string path = write_scratch(cfg, script);
  ProcessResult pr = run_command(cfg.effective_chc_cmd(), path, cfg.timeout_secs);
  drop_scratch(cfg, path);
  return parse_verdict(pr);
}

}  // namespace impverif
