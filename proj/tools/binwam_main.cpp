#include <chrono>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "binwam/session.hpp"
#include "binwam/writer.hpp"

using namespace binwam;

namespace {

struct Options {
  std::vector<std::string> files;
  std::string goal;
  std::string dump;
  std::string kernel_path;
  bool no_instr_compression = false;
  bool no_term_compression = false;
  bool trace = false;
  bool dump_binarized = false;
  std::size_t heap_limit = std::size_t{1} << 24;
  int bench = 0;
};

std::optional<std::string> read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) return std::nullopt;
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

Flags flags_of(const Options& opt) {
  Flags f;
  f.term_compression = !opt.no_term_compression;
  f.instr_compression = !opt.no_instr_compression;
  f.trace = opt.trace;
  f.heap_limit = opt.heap_limit;
  return f;
}

std::unique_ptr<Session> make_session(const Options& opt, Flags f) {
  std::optional<std::string> kernel;
  if (!opt.kernel_path.empty()) {
    kernel = read_file(opt.kernel_path);
    if (!kernel) throw std::runtime_error("cannot read " + opt.kernel_path);
  }
  auto s = std::make_unique<Session>(f, kernel);
  for (const auto& path : opt.files) s->consult_file(path);
  return s;
}

void print_answer(const RootQuery::Answer& a) {
  for (const auto& [name, value] : a.bindings)
    std::cout << name << "=" << value << "\n";
}

// Run a goal, printing every answer. Exit code 0 if any answer, 1 if none.
int run_goal(Session& sess, const std::string& goal) {
  RootQuery q(sess, goal);
  bool any = false;
  while (auto a = q.next()) {
    any = true;
    print_answer(*a);
  }
  return any ? 0 : 1;
}

int repl(Session& sess) {
  std::string line;
  std::cout << "?- " << std::flush;
  while (std::getline(std::cin, line)) {
    std::string text = line;
    while (!text.empty() && (text.back() == ' ' || text.back() == '\t'))
      text.pop_back();
    if (text.empty()) {
      std::cout << "?- " << std::flush;
      continue;
    }
    if (text == "halt.") return 0;
    if (!text.empty() && text.back() == '.') text.pop_back();
    try {
      RootQuery q(sess, text);
      bool more = true;
      while (more) {
        auto a = q.next();
        if (!a) {
          std::cout << "no" << "\n";
          break;
        }
        if (a->bindings.empty())
          std::cout << "yes" << "\n";
        else
          print_answer(*a);
        std::cout << "; for more, anything else stops: " << std::flush;
        std::string resp;
        if (!std::getline(std::cin, resp) || resp != ";") more = false;
      }
    } catch (const std::exception& e) {
      std::cout << "error: " << e.what() << "\n";
    }
    std::cout << "?- " << std::flush;
  }
  return 0;
}

struct BenchRow {
  std::string config;
  std::uint64_t instructions;
  std::uint64_t choice_points;
  std::size_t high_water;
  double millis;
};

int bench(const Options& opt) {
  if (opt.goal.empty()) {
    std::cerr << "--bench needs --goal\n";
    return 2;
  }
  std::vector<BenchRow> rows;
  for (bool instr : {true, false}) {
    for (bool term : {true, false}) {
      Flags f = flags_of(opt);
      f.instr_compression = instr;
      f.term_compression = term;
      auto sess = make_session(opt, f);
      auto t0 = std::chrono::steady_clock::now();
      std::uint64_t i0 = sess->stats.instructions;
      std::uint64_t c0 = sess->stats.choice_points;
      std::size_t hw = 0;
      for (int r = 0; r < opt.bench; ++r) {
        RootQuery q(*sess, opt.goal);
        while (q.next()) {
        }
        hw = std::max(hw, q.engine().stats().heap_high_water);
      }
      auto t1 = std::chrono::steady_clock::now();
      BenchRow row;
      row.config = std::string("instr=") + (instr ? "on " : "off") +
                   " term=" + (term ? "on " : "off");
      row.instructions = sess->stats.instructions - i0;
      row.choice_points = sess->stats.choice_points - c0;
      row.high_water = hw;
      row.millis =
          std::chrono::duration<double, std::milli>(t1 - t0).count();
      rows.push_back(row);
    }
  }
  std::cout << "goal: " << opt.goal << "  repeats: " << opt.bench << "\n";
  for (const auto& r : rows)
    std::cout << r.config << "  instructions=" << r.instructions
              << "  choice_points=" << r.choice_points
              << "  heap_high_water=" << r.high_water << "  wall_ms="
              << r.millis << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  Options opt;
  CLI::App app{"binwam - a continuation-passing Prolog system"};
  app.add_option("files", opt.files, "Prolog source files to consult");
  app.add_option("--goal", opt.goal, "goal to run (without trailing '.')");
  app.add_option("--dump", opt.dump,
                 "print the linked code of PRED/ARITY (binarized arity)");
  app.add_flag("--dump-binarized", opt.dump_binarized,
               "print the binarized form of the consulted files");
  app.add_flag("--no-instr-compression", opt.no_instr_compression,
               "disable load-time instruction fusion");
  app.add_flag("--no-term-compression", opt.no_term_compression,
               "build terms in the uncompressed reference layout");
  app.add_flag("--trace", opt.trace, "log every executed instruction");
  app.add_option("--heap-limit", opt.heap_limit, "heap limit in cells");
  app.add_option("--kernel", opt.kernel_path, "alternative kernel file");
  app.add_option("--bench", opt.bench,
                 "run --goal N times per compression configuration");
  CLI11_PARSE(app, argc, argv);

  try {
    if (opt.bench > 0) return bench(opt);
    auto sess = make_session(opt, flags_of(opt));
    if (opt.dump_binarized) {
      for (const auto& path : opt.files) {
        auto text = read_file(path);
        if (!text) throw std::runtime_error("cannot read " + path);
        std::cout << sess->dump_binarized(*text);
      }
      return 0;
    }
    if (!opt.dump.empty()) {
      auto slash = opt.dump.rfind('/');
      if (slash == std::string::npos) {
        std::cerr << "--dump expects PRED/ARITY\n";
        return 2;
      }
      std::string name = opt.dump.substr(0, slash);
      std::uint32_t arity =
          static_cast<std::uint32_t>(std::stoul(opt.dump.substr(slash + 1)));
      std::string text = sess->dump_predicate(name, arity);
      if (text.empty()) {
        std::cerr << "unknown predicate " << opt.dump << "\n";
        return 2;
      }
      std::cout << text;
      return 0;
    }
    if (!opt.goal.empty()) return run_goal(*sess, opt.goal);
    return repl(*sess);
  } catch (const QueryError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}
