// Command-line front end: parsing, simulation, membership decision,
// machine transformations, tabulation, exact probabilities, and query
// circuit extraction.
//
// Exit codes: 0 success, 2 parse/validation error, 3 resource bounds
// exceeded, 4 precondition failure.

#include <cstdlib>
#include <fstream>
#include <iostream>

#include "CLI11.hpp"
#include "opda/circuit.hpp"
#include "opda/errors.hpp"
#include "opda/eval.hpp"
#include "opda/hierarchy.hpp"
#include "opda/machine_io.hpp"
#include "opda/ppda.hpp"
#include "opda/transforms.hpp"
#include "opda/zoo.hpp"

using namespace opda;

namespace {

uint64_t default_coeff() {
  if (const char* env = std::getenv("OPDA_MAX_STEPS")) {
    return std::strtoull(env, nullptr, 10);
  }
  return 64;
}

struct BoundsArgs {
  uint64_t coeff = default_coeff();
  uint64_t max_steps = 0;  // 0 = derive from input length

  RunBounds make(size_t n) const {
    RunBounds b = RunBounds::for_input_length(n, coeff);
    if (max_steps > 0) {
      b.max_steps = max_steps;
      b.max_stack_height = max_steps;
      b.max_tape_len = max_steps;
    }
    return b;
  }
  void attach(CLI::App* cmd) {
    cmd->add_option("--bounds-coeff", coeff,
                    "linear bounds coefficient (default 64)");
    cmd->add_option("--max-steps", max_steps,
                    "absolute per-path step bound (overrides the default)");
  }
};

MachineSpec load_machine(const std::string& path) {
  MachineSpec m = parse_machine_file(path);
  validate_or_throw(m);
  return m;
}

std::string csv_table(Evaluator& ev, const ExprPtr& e, size_t max_len) {
  std::string out = "string,member\n";
  for (const auto& [w, v] : ev.table(e, max_len)) {
    out += render_word(w);
    out += v ? ",true\n" : ",false\n";
  }
  return out;
}

void write_or_print(const std::string& path, const std::string& content) {
  if (path.empty() || path == "-") {
    std::cout << content;
    return;
  }
  std::ofstream f(path, std::ios::binary);
  if (!f) throw PreconditionError("cannot open '" + path + "' for writing");
  f << content;
}

std::map<Symbol, Word> load_hom_map(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError(path, 0, "cannot open file");
  std::map<Symbol, Word> h;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    lineno++;
    std::istringstream ls(line);
    std::string head;
    if (!(ls >> head) || head[0] == '#') continue;
    if (head != "map") {
      throw ParseError(path, lineno, "expected: map <sym> -> <tokens>");
    }
    std::string sym, arrow, tok;
    if (!(ls >> sym >> arrow) || arrow != "->") {
      throw ParseError(path, lineno, "expected: map <sym> -> <tokens>");
    }
    Word img;
    while (ls >> tok) {
      if (tok == "-") break;
      img.push_back(intern_symbol(tok));
    }
    h[intern_symbol(sym)] = std::move(img);
  }
  return h;
}

int run_cli(int argc, char** argv) {
  CLI::App app{"oracle pushdown automata toolkit"};
  app.require_subcommand(1);

  std::string parse_file;
  auto* cmd_parse = app.add_subcommand("parse", "validate a machine file");
  cmd_parse->add_option("file", parse_file)->required();

  std::string run_file, run_word;
  BoundsArgs run_bounds;
  auto* cmd_run = app.add_subcommand("run", "simulate a machine on a word");
  cmd_run->add_option("file", run_file)->required();
  cmd_run->add_option("word", run_word)->required();
  run_bounds.attach(cmd_run);

  std::string out_file, out_word;
  BoundsArgs out_bounds;
  auto* cmd_out = app.add_subcommand(
      "outputs", "print the valid outputs of a reducer on a word");
  cmd_out->add_option("file", out_file)->required();
  cmd_out->add_option("word", out_word)->required();
  out_bounds.attach(cmd_out);

  std::string dec_file, dec_word;
  BoundsArgs dec_bounds;
  auto* cmd_dec = app.add_subcommand("decide", "decide oracle membership");
  cmd_dec->add_option("file", dec_file)->required();
  cmd_dec->add_option("word", dec_word)->required();
  dec_bounds.attach(cmd_dec);

  std::string tab_file, tab_out;
  size_t tab_len = 0;
  BoundsArgs tab_bounds;
  auto* cmd_tab =
      app.add_subcommand("table", "length-lexicographic membership table");
  cmd_tab->add_option("file", tab_file)->required();
  cmd_tab->add_option("--max-len", tab_len)->required();
  cmd_tab->add_option("--out", tab_out, "output file (default stdout)");
  tab_bounds.attach(cmd_tab);

  std::string dy_file, dy_out_m, dy_out_e;
  auto* cmd_dy = app.add_subcommand(
      "dyckify", "rewrite an npda into a stack-history reducer");
  cmd_dy->add_option("file", dy_file)->required();
  cmd_dy->add_option("--out-machine", dy_out_m)->required();
  cmd_dy->add_option("--out-expr", dy_out_e)->required();

  auto* cmd_tr = app.add_subcommand("transform", "machine transformations");
  cmd_tr->require_subcommand(1);
  struct Unary {
    CLI::App* cmd = nullptr;
    std::string in, out;
  };
  std::map<std::string, Unary> unary;
  for (const char* name : {"flip-halting", "flip-answers", "normalize-end",
                           "copy-input", "guess-answers", "star", "reverse",
                           "reverse-turing"}) {
    Unary& u = unary[name];
    u.cmd = cmd_tr->add_subcommand(name);
    u.cmd->add_option("file", u.in)->required();
    u.cmd->add_option("--out", u.out)->required();
  }
  struct Binary {
    CLI::App* cmd = nullptr;
    std::string a, b, out;
  };
  std::map<std::string, Binary> binary;
  for (const char* name :
       {"absorb-nfa", "absorb-dpda", "union", "concat", "homomorphism",
        "inv-homomorphism"}) {
    Binary& u = binary[name];
    u.cmd = cmd_tr->add_subcommand(name);
    u.cmd->add_option("a", u.a)->required();
    u.cmd->add_option("b", u.b)->required();
    u.cmd->add_option("--out", u.out)->required();
  }
  std::string ar_red, ar_dfa, ar_mode = "many-one", ar_table, ar_out;
  auto* cmd_ar = cmd_tr->add_subcommand("absorb-regular");
  cmd_ar->add_option("reducer", ar_red)->required();
  cmd_ar->add_option("dfa", ar_dfa)->required();
  cmd_ar->add_option("--mode", ar_mode, "many-one | turing | ktt");
  cmd_ar->add_option("--table", ar_table, "truth table (ktt mode)");
  cmd_ar->add_option("--out", ar_out)->required();
  std::vector<std::string> pr_files;
  std::string pr_out_m, pr_out_e;
  auto* cmd_pr = cmd_tr->add_subcommand("product");
  cmd_pr->add_option("files", pr_files)->required()->expected(-1);
  cmd_pr->add_option("--out-machine", pr_out_m)->required();
  cmd_pr->add_option("--out-expr", pr_out_e)->required();
  std::string ep_in, ep_enc, ep_rep;
  auto* cmd_ep = cmd_tr->add_subcommand("encode-path");
  cmd_ep->add_option("file", ep_in)->required();
  cmd_ep->add_option("--out-encoder", ep_enc)->required();
  cmd_ep->add_option("--out-replayer", ep_rep)->required();
  std::string su_base, su_out;
  std::vector<std::string> su_maps;
  auto* cmd_su = cmd_tr->add_subcommand("substitute");
  cmd_su->add_option("file", su_base)->required();
  cmd_su->add_option("--with", su_maps, "<symbol>=<machine file>")
      ->required()
      ->expected(-1);
  cmd_su->add_option("--out", su_out)->required();

  auto* cmd_zoo = app.add_subcommand("zoo", "shipped example languages");
  auto* cmd_zoo_list = cmd_zoo->add_subcommand("list");
  std::string zc_name;
  size_t zc_len = 0;
  auto* cmd_zoo_cc = cmd_zoo->add_subcommand("crosscheck");
  cmd_zoo_cc->add_option("name", zc_name)->required();
  cmd_zoo_cc->add_option("--max-len", zc_len);

  std::string pb_file, pb_word;
  BoundsArgs pb_bounds;
  auto* cmd_pb =
      app.add_subcommand("prob", "exact acceptance probability of a ppda");
  cmd_pb->add_option("file", pb_file)->required();
  cmd_pb->add_option("word", pb_word)->required();
  pb_bounds.attach(cmd_pb);

  int e6_n = 5;
  std::string e6_out;
  auto* cmd_e6 = app.add_subcommand(
      "equal6", "generate the six-symbol count-equality ppda");
  cmd_e6->add_option("--n", e6_n, "draw range bound (default 5)");
  cmd_e6->add_option("--out", e6_out)->required();

  auto* cmd_ci = app.add_subcommand("circuit", "query circuit extraction");
  cmd_ci->require_subcommand(1);
  std::vector<std::string> cb_chain;
  std::string cb_word, cb_out;
  auto* cmd_cb = cmd_ci->add_subcommand("build");
  cmd_cb->add_option("--chain", cb_chain, "one or two turing reducers")
      ->required()
      ->expected(-1);
  cmd_cb->add_option("word", cb_word)->required();
  cmd_cb->add_option("--out", cb_out)->required();
  std::string ce_file, ce_oracle;
  auto* cmd_ce = cmd_ci->add_subcommand("eval");
  cmd_ce->add_option("file", ce_file)->required();
  cmd_ce->add_option("--oracle", ce_oracle, "oracle expression file")
      ->required();
  std::string cd_file, cd_out;
  auto* cmd_cd = cmd_ci->add_subcommand("dual");
  cmd_cd->add_option("file", cd_file)->required();
  cmd_cd->add_option("--out", cd_out)->required();

  CLI11_PARSE(app, argc, argv);

  if (cmd_parse->parsed()) {
    MachineSpec m = parse_machine_file(parse_file);
    auto v = validate(m);
    if (!v.empty()) {
      for (const auto& s : v) std::cerr << parse_file << ": " << s << "\n";
      return 2;
    }
    std::cout << "ok: machine '" << m.name << "', " << m.states.size()
              << " states, " << m.transitions.size() << " transitions\n";
    return 0;
  }

  if (cmd_run->parsed()) {
    MachineSpec m = load_machine(run_file);
    Word w = parse_word(run_word, m.input_alphabet);
    RunResult r = run_machine(m, w, run_bounds.make(w.size()));
    const char* verdict = r.verdict == Verdict::Accept    ? "accept"
                          : r.verdict == Verdict::Reject ? "reject"
                                                         : "resource-exceeded";
    std::cout << verdict << "\n";
    std::cout << "paths: " << r.stats.paths_explored
              << " accepting: " << r.stats.accepting_paths
              << " exceeded: " << r.stats.exceeded_paths
              << " repeated: " << r.stats.repeated_configs
              << " died: " << r.stats.died_paths << "\n";
    return r.verdict == Verdict::ResourceExceeded ? 3 : 0;
  }

  if (cmd_out->parsed()) {
    MachineSpec m = load_machine(out_file);
    Word w = parse_word(out_word, m.input_alphabet);
    RunResult r = run_machine(m, w, out_bounds.make(w.size()));
    std::vector<std::string> lines;
    for (const auto& tup : r.valid_outputs) {
      std::string line;
      for (size_t i = 0; i < tup.size(); ++i) {
        if (i) line += "\t";
        line += render_word(tup[i]);
      }
      lines.push_back(std::move(line));
    }
    std::sort(lines.begin(), lines.end());
    for (const auto& l : lines) std::cout << l << "\n";
    return r.verdict == Verdict::ResourceExceeded ? 3 : 0;
  }

  if (cmd_dec->parsed()) {
    ExprPtr e = parse_expr_file(dec_file);
    Evaluator ev(Evaluator::Options{dec_bounds.coeff, true});
    Word alpha = expr_alphabet(e);
    if (alpha.empty() && e->tag == ExprTag::Builtin) {
      alpha = zoo::entry(e->builtin_name).alphabet;
    }
    Word w = parse_word(dec_word, alpha);
    std::cout << (ev.member(e, w) ? "true" : "false") << "\n";
    return 0;
  }

  if (cmd_tab->parsed()) {
    ExprPtr e = parse_expr_file(tab_file);
    Evaluator ev(Evaluator::Options{tab_bounds.coeff, true});
    write_or_print(tab_out, csv_table(ev, e, tab_len));
    return 0;
  }

  if (cmd_dy->parsed()) {
    MachineSpec m = load_machine(dy_file);
    DyckifyResult d = dyckify(m);
    write_machine_file(d.reducer, dy_out_m);
    std::ofstream ef(dy_out_e, std::ios::binary);
    ef << "(many-one \"" << std::filesystem::path(dy_out_m).filename().string()
       << "\" (dyck " << d.dyck_width << "))\n";
    std::cout << "wrote " << dy_out_m << " and " << dy_out_e << "\n";
    return 0;
  }

  if (cmd_tr->parsed()) {
    auto emit = [&](const MachineSpec& m, const std::string& path) {
      write_machine_file(m, path);
      std::cout << "wrote " << path << "\n";
    };
    for (auto& [name, u] : unary) {
      if (!u.cmd->parsed()) continue;
      MachineSpec m = load_machine(u.in);
      if (name == "flip-halting") emit(flip_halting(m), u.out);
      else if (name == "flip-answers") emit(flip_answers(m), u.out);
      else if (name == "normalize-end") emit(normalize_end(m), u.out);
      else if (name == "copy-input") emit(copy_input_reducer(m), u.out);
      else if (name == "guess-answers") emit(guess_answers(m), u.out);
      else if (name == "star") emit(star_m(m), u.out);
      else if (name == "reverse") emit(reverse_m(m), u.out);
      else emit(reverse_turing(m), u.out);
      return 0;
    }
    for (auto& [name, u] : binary) {
      if (!u.cmd->parsed()) continue;
      MachineSpec a = load_machine(u.a);
      if (name == "absorb-nfa") {
        emit(absorb_nfa(a, load_machine(u.b)), u.out);
      } else if (name == "absorb-dpda") {
        emit(absorb_dpda_oracle(a, load_machine(u.b)), u.out);
      } else if (name == "union") {
        emit(union_m(a, load_machine(u.b)), u.out);
      } else if (name == "concat") {
        emit(concat_m(a, load_machine(u.b)), u.out);
      } else if (name == "homomorphism") {
        emit(homomorphism_m(a, load_hom_map(u.b)), u.out);
      } else {
        emit(inv_homomorphism_m(a, load_hom_map(u.b)), u.out);
      }
      return 0;
    }
    if (cmd_ar->parsed()) {
      MachineSpec red = load_machine(ar_red);
      MachineSpec dfa = load_machine(ar_dfa);
      OracleMode mode;
      if (ar_mode == "many-one") mode = OracleMode::ManyOne;
      else if (ar_mode == "turing") mode = OracleMode::Turing;
      else if (ar_mode == "ktt") mode = OracleMode::Ktt;
      else throw PreconditionError("unknown mode '" + ar_mode + "'");
      std::optional<MachineSpec> tbl;
      if (!ar_table.empty()) tbl = load_machine(ar_table);
      emit(absorb_regular_oracle(red, dfa, mode, tbl ? &*tbl : nullptr),
           ar_out);
      return 0;
    }
    if (cmd_pr->parsed()) {
      std::vector<MachineSpec> ms;
      for (const auto& f : pr_files) ms.push_back(load_machine(f));
      ProductResult pr = product_reducer(ms);
      write_machine_file(pr.reducer, pr_out_m);
      std::ofstream ef(pr_out_e, std::ios::binary);
      ef << "(many-one \""
         << std::filesystem::path(pr_out_m).filename().string()
         << "\" (dyck-ext " << ms.size() << "))\n";
      std::cout << "wrote " << pr_out_m << " and " << pr_out_e << "\n";
      return 0;
    }
    if (cmd_ep->parsed()) {
      EncodePathResult ep = encode_path_reducer(load_machine(ep_in));
      write_machine_file(ep.encoder, ep_enc);
      write_machine_file(ep.replayer, ep_rep);
      std::cout << "wrote " << ep_enc << " and " << ep_rep << "\n";
      return 0;
    }
    if (cmd_su->parsed()) {
      MachineSpec base = load_machine(su_base);
      std::map<Symbol, MachineSpec> s;
      for (const auto& spec : su_maps) {
        auto eq = spec.find('=');
        if (eq == std::string::npos) {
          throw PreconditionError("substitute: expected <symbol>=<file>");
        }
        s.emplace(intern_symbol(spec.substr(0, eq)),
                  load_machine(spec.substr(eq + 1)));
      }
      emit(substitute_m(base, s), su_out);
      return 0;
    }
  }

  if (cmd_zoo->parsed()) {
    if (cmd_zoo_list->parsed()) {
      for (const auto& e : zoo::entries()) {
        std::string alpha;
        for (Symbol s : e.alphabet) {
          if (!alpha.empty()) alpha += ' ';
          alpha += symbol_name(s);
        }
        std::cout << e.name << "\tmax-len " << e.test_max_len << "\t{" << alpha
                  << "}\t" << e.summary << "\n";
      }
      return 0;
    }
    if (cmd_zoo_cc->parsed()) {
      const auto& e = zoo::entry(zc_name);
      size_t len = cmd_zoo_cc->count("--max-len") ? zc_len : e.test_max_len;
      Evaluator ev;
      auto rep = zoo::crosscheck(zc_name, len, ev);
      std::cout << zc_name << ": checked " << rep.checked << " words, "
                << rep.disagreements << " disagreements, "
                << rep.resource_incidents << " resource incidents ("
                << rep.seconds << "s)\n";
      if (rep.first_disagreement) {
        std::cout << "first disagreement: "
                  << render_word(*rep.first_disagreement) << "\n";
        return 1;
      }
      return rep.resource_incidents == 0 ? 0 : 3;
    }
  }

  if (cmd_e6->parsed()) {
    MachineSpec m = equal6_machine(e6_n);
    write_machine_file(m, e6_out);
    std::cout << "wrote " << e6_out << " (" << m.states.size() << " states, "
              << m.transitions.size() << " transitions)\n";
    return 0;
  }

  if (cmd_pb->parsed()) {
    MachineSpec m = load_machine(pb_file);
    Word w = parse_word(pb_word, m.input_alphabet);
    auto r = exact_acceptance_probability(m, w, pb_bounds.make(w.size()));
    std::cout << rational_str(r.accept) << "\n";
    return 0;
  }

  if (cmd_ci->parsed()) {
    if (cmd_cb->parsed()) {
      std::vector<MachineSpec> chain;
      for (const auto& f : cb_chain) chain.push_back(load_machine(f));
      if (chain.empty()) throw PreconditionError("empty reducer chain");
      Word x = parse_word(cb_word, chain[0].input_alphabet);
      Circuit c =
          build_query_circuit(chain, x, RunBounds::for_input_length(x.size()));
      write_or_print(cb_out, write_circuit(c));
      return 0;
    }
    if (cmd_ce->parsed()) {
      std::ifstream in(ce_file);
      if (!in) throw ParseError(ce_file, 0, "cannot open file");
      Circuit c = parse_circuit(in, ce_file);
      ExprPtr oracle = parse_expr_file(ce_oracle);
      Evaluator ev;
      bool v =
          eval_circuit(c, [&](const Word& w) { return ev.member(oracle, w); });
      std::cout << (v ? "true" : "false") << "\n";
      return 0;
    }
    if (cmd_cd->parsed()) {
      std::ifstream in(cd_file);
      if (!in) throw ParseError(cd_file, 0, "cannot open file");
      Circuit c = parse_circuit(in, cd_file);
      write_or_print(cd_out, write_circuit(dual_circuit(c)));
      return 0;
    }
  }

  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run_cli(argc, argv);
  } catch (const OpdaError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return static_cast<int>(e.code());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}
