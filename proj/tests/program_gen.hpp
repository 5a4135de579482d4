// Small safe programs from a handful of shapes with random constants.
#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <utility>
#include <vector>

struct GeneratedProgram {
  std::string name;
  std::string text;
};

namespace progen {

inline std::string s(long v) { return std::to_string(v); }

inline std::string fill_fun(const std::string& name, const std::string& value) {
  return name + "(n, p)\n[ <n: int, p: int ref> ->\n  <n: int, p: int ref | int> ]\n{\n  if n <= 0 then {\n    1\n"
         "  } else {\n    p := " + value + "; let q = p + 1 in let m = n - 1 in\n    let d = " + name +
         "(m, q) in 0\n  }\n}\n\n";
}

inline std::string check_fun(const std::string& name, const std::string& cond) {
  return name + "(n, p)\n[ <n: int, p: int ref> ->\n  <n: int, p: int ref | int> ]\n{\n  if n <= 0 then {\n    1\n"
         "  } else {\n    let y = *p in assert(" + cond + "); let q = p + 1 in let m = n - 1 in\n    let d = " + name +
         "(m, q) in 0\n  }\n}\n\n";
}

inline std::string abs_fun() {
  return "abs(m)\n[ <m: int> -> <m: int | int> ]\n{\n  if m >= 0 then {\n    m\n  } else {\n    let k = -m in k\n  }\n}\n\n";
}

}  // namespace progen

inline std::vector<GeneratedProgram> generated_programs(int count, uint64_t seed) {
  using progen::s;
  std::mt19937_64 rng(seed);
  auto pick = [&](long lo, long hi) { return std::uniform_int_distribution<long>(lo, hi)(rng); };
  std::vector<GeneratedProgram> out;
  for (int k = 0; k < count; ++k) {
    std::string text;
    std::string shape;
    switch (k % 6) {
      case 0: {  // write one cell through an offset pointer, read it back
        shape = "cell";
        long n = pick(1, 12), off = pick(0, n - 1), v = pick(-50, 50);
        text = "{\n  let p = alloc " + s(n) + " in let k = " + s(off) + " in let q = p + k in\n  q := " + s(v) +
               "; let x = *q in assert(x = " + s(v) + "); 0\n}\n";
        break;
      }
      case 1: {  // fill with a constant, check every cell
        shape = "fill";
        long n = pick(1, 40), v = pick(-20, 20);
        text = progen::fill_fun("fill", s(v)) + progen::check_fun("check", "y = " + s(v)) + "{\n  let p = alloc " +
               s(n) + " in let m = " + s(n) + " in\n  let d1 = fill(m, p) in let d2 = check(m, p) in 0\n}\n";
        break;
      }
      case 2: {  // fill with a constant, check a bound on every cell
        shape = "bound";
        long n = pick(1, 40), v = pick(-20, 20), slack = pick(0, 5);
        bool upper = pick(0, 1) == 1;
        std::string cond = upper ? "y <= " + s(v + slack) : "y >= " + s(v - slack);
        text = progen::fill_fun("fill", s(v)) + progen::check_fun("check", cond) + "{\n  let p = alloc " + s(n) +
               " in let m = " + s(n) + " in\n  let d1 = fill(m, p) in let d2 = check(m, p) in 0\n}\n";
        break;
      }
      case 3: {  // fill with a non-negative nondeterministic value, read one cell
        shape = "nondet";
        long n = pick(2, 30), off = pick(0, n - 1);
        text = progen::abs_fun() +
               "fill_x(n, x, p)\n[ <n: int, x: int, p: int ref> ->\n  <n: int, x: int, p: int ref | int> ]\n{\n"
               "  if n <= 0 then {\n    1\n  } else {\n    p := x; let q = p + 1 in let m = n - 1 in\n"
               "    let d = fill_x(m, x, q) in 0\n  }\n}\n\n{\n  let p = alloc " + s(n) + " in let m = " + s(n) +
               " in\n  let r = _ in let z = abs(r) in let d = fill_x(m, z, p) in\n  let k = " + s(off) +
               " in let q = p + k in let x = *q in assert(x >= 0); 0\n}\n";
        break;
      }
      case 4: {  // scalar arithmetic with a nondeterministic input
        shape = "scalar";
        long a = pick(1, 9);
        text = progen::abs_fun() + "{\n  let r = _ in let z = abs(r) in let w = z + " + s(a) +
               " in\n  assert(w > z); assert(w >= " + s(a) + "); 0\n}\n";
        break;
      }
      default: {  // two cells written through two pointers into one array
        shape = "pair";
        long n = pick(2, 12), i = pick(0, n - 2), v = pick(-9, 9), w = pick(-9, 9);
        text = "{\n  let p = alloc " + s(n) + " in let k = " + s(i) + " in let q = p + k in\n  q := " + s(v) +
               "; let j = 1 in let r = q + j in r := " + s(w) + ";\n  let x = *q in let y = *r in assert(x = " + s(v) +
               "); assert(y = " + s(w) + "); 0\n}\n";
        break;
      }
    }
    out.push_back({"gen" + std::to_string(k) + "_" + shape, std::move(text)});
  }
  return out;
}
