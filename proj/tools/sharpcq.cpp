#include <CLI11.hpp>
#include <json.hpp>

#include <cstdlib>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include "sharpcq/config.hpp"
#include "sharpcq/corpus.hpp"
#include "sharpcq/counting.hpp"
#include "sharpcq/decomposition.hpp"
#include "sharpcq/errors.hpp"
#include "sharpcq/homomorphism.hpp"
#include "sharpcq/hybrid.hpp"
#include "sharpcq/hypergraph.hpp"
#include "sharpcq/io.hpp"
#include "sharpcq/oracle.hpp"

using nlohmann::json;
using namespace sharpcq;

namespace {

std::string decimal(const BigInt& n) { return n.str(); }

json vars_json(const VarSet& vars) { return json(std::vector<std::string>(vars.begin(), vars.end())); }

json atoms_json(const std::vector<Atom>& atoms) {
  json out = json::array();
  for (const auto& a : atoms) out.push_back(print_atom(a));
  return out;
}

json hd_json(const HypertreeDecomposition& hd, const Query& q) {
  json vertices = json::array();
  for (const auto& v : hd.vertices) {
    std::vector<Atom> lambda;
    for (std::size_t i : v.lambda) lambda.push_back(q.atoms().at(i));
    vertices.push_back({{"chi", vars_json(v.chi)}, {"lambda", atoms_json(lambda)}, {"children", v.children}});
  }
  return {{"root", hd.root}, {"vertices", vertices}};
}

std::string hd_dot(const HypertreeDecomposition& hd, const Query& q) {
  std::ostringstream out;
  out << "digraph decomposition {\n  node [shape=box];\n";
  for (std::size_t i = 0; i < hd.vertices.size(); ++i) {
    out << "  v" << i << " [label=\"" << print_vars(hd.vertices[i].chi) << "\\n";
    for (std::size_t a : hd.vertices[i].lambda) out << print_atom(q.atoms()[a]) << " ";
    out << "\"];\n";
    for (std::size_t c : hd.vertices[i].children) out << "  v" << i << " -> v" << c << ";\n";
  }
  out << "}\n";
  return out.str();
}

void emit(const json& j) { std::cout << j.dump() << "\n"; }

VarSet parse_var_list(const std::string& text) {
  VarSet out;
  std::stringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    auto b = item.find_first_not_of(' ');
    auto e = item.find_last_not_of(' ');
    if (b != std::string::npos) out.insert(item.substr(b, e - b + 1));
  }
  return out;
}

struct Common {
  std::string query_path;
  std::string db_path;
  bool json = false;
};

void report_count(const CountReport& r, bool as_json, bool timing) {
  if (!as_json) {
    std::cout << decimal(r.count) << "\n";
    return;
  }
  json j;
  j["count"] = decimal(r.count);
  j["mode_used"] = to_string(r.mode_used);
  j["width"] = r.width ? json(*r.width) : json(nullptr);
  j["bound"] = r.bound ? json(*r.bound) : json(nullptr);
  j["core_atoms"] = atoms_json(r.core_atoms);
  j["promoted"] = r.promoted ? vars_json(*r.promoted) : json(nullptr);
  j["elapsed_ms"] = timing ? r.elapsed_ms : 0.0;
  emit(j);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Counting answers of conjunctive queries via #-hypertree decompositions"};
  app.require_subcommand(1);
  bool paranoid_flag = false;
  app.add_flag("--paranoid", paranoid_flag, "Cross-check consistency-based core decisions");

  RunConfig cfg;
  std::string mode_text = "auto";
  bool no_timing = false;
  Common common;

  auto add_run_options = [&](CLI::App* sub) {
    sub->add_option("--query", common.query_path, "Query file")->required()->check(CLI::ExistingFile);
    sub->add_option("--db", common.db_path, "Facts file or CSV directory")->required()->check(CLI::ExistingPath);
    sub->add_option("--kmax", cfg.kmax, "Largest width tried")->check(CLI::PositiveNumber);
    sub->add_option("--bmax", cfg.bmax, "Largest degree bound tried")->check(CLI::PositiveNumber);
    sub->add_option("--cores", cfg.cores_to_try, "Cores tried per width")->check(CLI::PositiveNumber);
    sub->add_option("--max-promoted", cfg.max_promoted, "Cap on promoted quantified variables");
    sub->add_option("--state-cap", cfg.state_cap, "Oracle state cap")->check(CLI::PositiveNumber);
    sub->add_flag("--json", common.json, "Emit a JSON object");
    sub->add_flag("--no-timing", no_timing, "Report elapsed_ms as 0 (byte-stable output)");
  };

  auto* count_cmd = app.add_subcommand("count", "Count the answers of a query");
  add_run_options(count_cmd);
  count_cmd->add_option("--mode", mode_text, "auto|structural|hybrid|oracle");

  auto* oracle_cmd = app.add_subcommand("oracle-count", "Count answers by brute force");
  add_run_options(oracle_cmd);

  std::size_t width = 0;
  bool sharp = false;
  bool dot = false;
  bool optimal = false;
  auto* decompose_cmd = app.add_subcommand("decompose", "Compute a (generalized or #-) hypertree decomposition");
  decompose_cmd->add_option("--query", common.query_path, "Query file")->required()->check(CLI::ExistingFile);
  decompose_cmd->add_option("--width", width, "Width to decompose with")->check(CLI::PositiveNumber);
  decompose_cmd->add_flag("--sharp", sharp, "Search a #-hypertree decomposition");
  decompose_cmd->add_option("--kmax", cfg.kmax, "Largest width tried with --sharp")->check(CLI::PositiveNumber);
  decompose_cmd->add_option("--cores", cfg.cores_to_try, "Cores tried per width")->check(CLI::PositiveNumber);
  decompose_cmd->add_flag("--optimal", optimal, "Cost-optimal normal-form decomposition (needs --db)");
  decompose_cmd->add_option("--db", common.db_path, "Database for --optimal")->check(CLI::ExistingPath);
  decompose_cmd->add_flag("--dot", dot, "Emit Graphviz DOT");
  decompose_cmd->add_flag("--json", common.json, "Emit a JSON object");

  bool colored = false;
  std::size_t consistency_k = 0;
  auto* core_cmd = app.add_subcommand("core", "Print the core of a query");
  core_cmd->add_option("--query", common.query_path, "Query file")->required()->check(CLI::ExistingFile);
  core_cmd->add_flag("--colored", colored, "Core of the colored query (keeps every free variable)");
  core_cmd->add_option("--via-consistency", consistency_k, "Decide homomorphisms by pairwise consistency at width K");
  core_cmd->add_flag("--json", common.json, "Emit a JSON object");

  std::string w_text;
  bool w_given = false;
  auto* frontier_cmd = app.add_subcommand("frontier", "Frontier hypergraph of a query");
  frontier_cmd->add_option("--query", common.query_path, "Query file")->required()->check(CLI::ExistingFile);
  auto* w_opt = frontier_cmd->add_option("--w", w_text, "Comma-separated W (default: free variables)");
  frontier_cmd->add_flag("--json", common.json, "Emit JSON instead of DOT");

  auto* hybrid_cmd = app.add_subcommand("hybrid", "Search a #_b decomposition and count with it");
  hybrid_cmd->add_option("--query", common.query_path, "Query file")->required()->check(CLI::ExistingFile);
  hybrid_cmd->add_option("--db", common.db_path, "Facts file or CSV directory")->required()->check(CLI::ExistingPath);
  hybrid_cmd->add_option("--width", width, "Width k")->required()->check(CLI::PositiveNumber);
  hybrid_cmd->add_option("--bmax", cfg.bmax, "Largest degree bound tried")->check(CLI::PositiveNumber);
  hybrid_cmd->add_option("--max-promoted", cfg.max_promoted, "Cap on promoted quantified variables");
  hybrid_cmd->add_flag("--json", common.json, "Emit a JSON object");

  auto* degree_cmd = app.add_subcommand("degree", "Degrees of a #-hypertree decomposition's vertices");
  degree_cmd->add_option("--query", common.query_path, "Query file")->required()->check(CLI::ExistingFile);
  degree_cmd->add_option("--db", common.db_path, "Facts file or CSV directory")->required()->check(CLI::ExistingPath);
  degree_cmd->add_option("--kmax", cfg.kmax, "Largest width tried")->check(CLI::PositiveNumber);
  degree_cmd->add_flag("--json", common.json, "Emit a JSON object");

  std::size_t corpus_n = 200;
  std::string out_dir = "corpus";
  auto* gen_cmd = app.add_subcommand("gen-corpus", "Write a seeded random corpus of instances");
  gen_cmd->add_option("--seed", cfg.seed, "Generator seed");
  gen_cmd->add_option("--n", corpus_n, "Number of instances")->check(CLI::PositiveNumber);
  gen_cmd->add_option("--out", out_dir, "Output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 1;
  }
  if (paranoid_flag) set_paranoid(true);
  w_given = w_opt->count() > 0;

  try {
    if (count_cmd->parsed() || oracle_cmd->parsed()) {
      cfg.mode = oracle_cmd->parsed() ? Mode::Oracle : parse_mode(mode_text);
      Query q = read_query_file(common.query_path);
      Database db = parse_database(common.db_path);
      report_count(count(q, db, cfg), common.json, !no_timing);
    } else if (decompose_cmd->parsed()) {
      Query q = read_query_file(common.query_path);
      HypertreeDecomposition hd;
      std::optional<Query> core_q;
      std::size_t found_width = 0;
      if (optimal) {
        if (common.db_path.empty() || width == 0) throw Error("--optimal needs --db and --width");
        Database db = parse_database(common.db_path);
        auto best = d_optimal_nf(q, db, width);
        if (!best) throw NoDecompositionWithinBudget("no normal-form decomposition of width " + std::to_string(width));
        hd = std::move(*best);
        found_width = hd.width();
      } else if (sharp) {
        auto sw = sharp_hypertree_width(q, width ? width : cfg.kmax, cfg.cores_to_try);
        if (!sw) throw NoDecompositionWithinBudget("no #-hypertree decomposition within the width budget");
        hd = std::move(sw->hd);
        core_q = std::move(sw->core);
        found_width = sw->k;
      } else {
        if (width == 0) throw Error("--width is required without --sharp");
        ViewSet vs = build_view_set(q, std::min(width, q.atoms().size()));
        auto tp = tree_projection(hypergraph_of(q.atoms()), vs.edges());
        if (!tp) throw NoDecompositionWithinBudget("no generalized hypertree decomposition of width " +
                                                   std::to_string(width));
        hd = to_hypertree_decomposition(*tp, vs);
        found_width = width;
      }
      const Query& owner = core_q ? *core_q : q;
      if (common.json) {
        json j = hd_json(hd, owner);
        j["width"] = found_width;
        j["core_atoms"] = core_q ? atoms_json(core_q->atoms()) : json(nullptr);
        emit(j);
      } else if (dot) {
        std::cout << hd_dot(hd, owner);
      } else {
        std::cout << "width " << found_width << "\n" << format_hd(hd, owner);
      }
    } else if (core_cmd->parsed()) {
      Query q = read_query_file(common.query_path);
      Query source = colored ? color(q).query : q;
      std::vector<std::size_t> kept;
      if (consistency_k) {
        auto via = core_indices_via_consistency(source, consistency_k, paranoid());
        if (!via)
          throw WidthAssumptionViolated("consistency disagrees with homomorphism search at width " +
                                        std::to_string(consistency_k));
        kept = *via;
      } else {
        kept = core_atom_indices(source);
      }
      std::vector<std::size_t> original;
      for (std::size_t i : kept)
        if (i < q.atoms().size()) original.push_back(i);
      Query c = q.subquery(original);
      if (common.json)
        emit({{"atoms", atoms_json(c.atoms())}, {"query", print_query(c)}});
      else
        std::cout << print_query(c) << "\n";
    } else if (frontier_cmd->parsed()) {
      Query q = read_query_file(common.query_path);
      VarSet w = w_given ? parse_var_list(w_text) : q.free();
      Hypergraph h = hypergraph_of(q.atoms());
      Hypergraph fh = frontier_hypergraph(q.atoms(), w);
      std::vector<std::vector<std::string>> edges;
      for (const auto& e : fh.edges()) edges.emplace_back(e.begin(), e.end());
      std::sort(edges.begin(), edges.end());
      if (common.json) {
        json components = json::array();
        for (const auto& c : w_components(h, w))
          components.push_back({{"component", vars_json(c)}, {"frontier", vars_json(frontier(*c.begin(), w, h))}});
        emit({{"w", vars_json(w)}, {"nodes", vars_json(fh.nodes())}, {"edges", edges}, {"components", components}});
      } else {
        std::cout << "graph frontier {\n";
        for (const auto& n : fh.nodes()) std::cout << "  \"" << n << "\";\n";
        std::size_t id = 0;
        for (const auto& e : edges) {
          std::cout << "  e" << id << " [shape=point];\n";
          for (const auto& n : e) std::cout << "  e" << id << " -- \"" << n << "\";\n";
          ++id;
        }
        std::cout << "}\n";
      }
    } else if (hybrid_cmd->parsed()) {
      Query q = read_query_file(common.query_path);
      Database db = parse_database(common.db_path);
      HybridSearchOptions options;
      options.max_promoted = cfg.max_promoted;
      auto found = search_sharp_b(q, db, width, cfg.bmax, options);
      if (!found) throw NoDecompositionWithinBudget("no #_b decomposition with b <= " + std::to_string(cfg.bmax));
      BigInt n = count_hybrid(q, db, found->hd, found->promoted);
      if (common.json) {
        json j = hd_json(found->hd, q);
        j["k"] = found->k;
        j["b"] = found->b;
        j["promoted"] = vars_json(found->promoted);
        j["count"] = decimal(n);
        emit(j);
      } else {
        std::cout << "k " << found->k << "\nb " << found->b << "\npromoted " << print_vars(found->promoted) << "\n"
                  << format_hd(found->hd, q) << "count " << decimal(n) << "\n";
      }
    } else if (degree_cmd->parsed()) {
      Query q = read_query_file(common.query_path);
      Database db = parse_database(common.db_path);
      auto sw = sharp_hypertree_width(q, cfg.kmax, cfg.cores_to_try);
      if (!sw) throw NoDecompositionWithinBudget("no #-hypertree decomposition within the width budget");
      DegreeProfile profile = bound(sw->hd, sw->core, db, q.free());
      if (common.json) {
        json j = hd_json(sw->hd, sw->core);
        j["width"] = sw->k;
        j["per_vertex"] = profile.per_vertex;
        j["bound"] = profile.overall;
        emit(j);
      } else {
        std::cout << "width " << sw->k << "\nbound " << profile.overall << "\n";
        for (std::size_t v = 0; v < profile.per_vertex.size(); ++v)
          std::cout << "  " << print_vars(sw->hd.vertices[v].chi) << " " << profile.per_vertex[v] << "\n";
      }
    } else if (gen_cmd->parsed()) {
      auto corpus = generate_corpus(cfg.seed, corpus_n);
      write_corpus(corpus, out_dir);
      std::cout << corpus.size() << " instances written to " << out_dir << "\n";
    }
  } catch (const NoDecompositionWithinBudget& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const StateCapExceeded& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const SearchBudgetExceeded& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
