// charp: exact characteristic-p differential algebra on affine patches.
// Subcommands parse a problem file, run the requested verification, print a
// human summary and optionally stream machine-readable records.

#include <chrono>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "charp/charp.hpp"
#include "charp/parse.hpp"
#include "charp/problem.hpp"
#include "charp/report.hpp"

namespace {

using namespace charp;

struct CommonFlags {
  std::string json_path;
  bool quiet = false;
  std::uint32_t level = 0; // 0 = use file/default
  std::uint32_t degree_bound = 0;
  std::uint32_t exponent = 0;
};

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw precondition_error("cannot open input file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

std::uint32_t level_cap() {
  if (const char* env = std::getenv("CHARP_MAX_LEVEL")) {
    std::uint32_t v = std::uint32_t(std::strtoul(env, nullptr, 10));
    if (v > 0) return v;
  }
  return 64;
}

std::uint32_t pick_level(const CommonFlags& flags, const ParsedProblem& prob,
                         std::uint32_t fallback) {
  std::uint32_t lvl = flags.level ? flags.level
                                  : prob.file.options.level.value_or(fallback);
  if (lvl > level_cap())
    throw precondition_error("level " + std::to_string(lvl) + " exceeds CHARP_MAX_LEVEL cap " +
                             std::to_string(level_cap()));
  return lvl;
}

std::uint32_t pick_bound(const CommonFlags& flags, const ParsedProblem& prob,
                         std::uint32_t fallback) {
  return flags.degree_bound ? flags.degree_bound
                            : prob.file.options.degree_bound.value_or(fallback);
}

const Connection& need_connection(const ParsedProblem& prob) {
  if (!prob.file.connection)
    throw precondition_error("this command needs a [connection] section");
  return *prob.file.connection;
}

std::string digest_of(const ParsedProblem& prob, const std::string& command,
                      const std::string& params) {
  return fnv1a_hex(serialize_problem(prob) + "\n" + command + "\n" + params);
}

std::vector<std::string> psi_witness(const Connection& c, const PCurvature& pc) {
  std::vector<std::string> w;
  for (std::size_t i = 0; i < pc.psi.size(); ++i) {
    std::string lhs = "psi(D" + std::to_string(i + 1) + ") = ";
    if (c.rank == 1)
      w.push_back(lhs + pc.psi[i].at(0, 0).render());
    else
      w.push_back(lhs + pc.psi[i].render());
  }
  return w;
}

Report cmd_curvature(const ParsedProblem& prob) {
  const Connection& c = need_connection(prob);
  Report rep;
  std::vector<std::string> w;
  for (std::size_t i = 0; i < c.nvars(); ++i)
    for (std::size_t j = i + 1; j < c.nvars(); ++j)
      w.push_back("K(" + std::to_string(i + 1) + "," + std::to_string(j + 1) + ") = " +
                  curvature(c, i, j).render());
  bool flat = is_integrable(c);
  w.push_back(std::string("integrable = ") + (flat ? "yes" : "no"));
  rep.add("curvature", digest_of(prob, "curvature", ""), true, std::move(w));
  return rep;
}

Report cmd_pcurvature(const ParsedProblem& prob) {
  const Connection& c = need_connection(prob);
  if (c.mode == WeightMode::DOL)
    throw precondition_error("p-curvature needs dr (or hod) weights");
  Report rep;
  PCurvature pc = p_curvature(c);
  std::vector<std::string> w = psi_witness(c, pc);
  w.push_back(std::string("integrable = ") + (is_integrable(c) ? "yes" : "no"));
  w.push_back(std::string("o_linear = ") + (pc.o_linear && pc.leading_ok ? "yes" : "no"));
  if (!pc.anomaly.empty()) w.push_back("anomaly: " + pc.anomaly);
  rep.add("pcurvature", digest_of(prob, "pcurvature", ""), pc.o_linear && pc.leading_ok,
          std::move(w));
  return rep;
}

Report cmd_stratify(const ParsedProblem& prob, const CommonFlags& flags) {
  const Connection& c = need_connection(prob);
  std::uint32_t level = pick_level(flags, prob, c.ring->p);
  Stratification s = taylor_stratification(c, level); // refuses non-integrable input
  Report rep;
  std::string params = "level=" + std::to_string(level);

  std::vector<std::string> w;
  for (std::size_t i = 0; i < s.rank; ++i)
    for (std::size_t j = 0; j < s.rank; ++j)
      w.push_back("eps(" + std::to_string(i + 1) + "," + std::to_string(j + 1) + ") = " +
                  s.at(i, j).render());
  bool cocycle = cocycle_check(s);
  w.push_back(std::string("cocycle = ") + (cocycle ? "yes" : "no"));
  rep.add("stratify-cocycle", digest_of(prob, "stratify", params), cocycle, std::move(w));

  // the mod-I image only sees tau^[p] and above, so the equalizer verdict
  // needs level >= p
  if (level >= c.ring->p) {
    bool identity = strat_mod_I_is_identity(s);
    bool psi_zero = p_curvature_vanishes(c);
    std::vector<std::string> w2{std::string("mod-I identity = ") + (identity ? "yes" : "no"),
                                std::string("p-curvature zero = ") + (psi_zero ? "yes" : "no")};
    rep.add("stratify-equalizer", digest_of(prob, "stratify-equalizer", params),
            identity == psi_zero, std::move(w2));
  }
  return rep;
}

Report cmd_horizontal(const ParsedProblem& prob) {
  const Connection& c = need_connection(prob);
  HorizontalField h = horizontal_fields(c);
  Report rep;
  bool bc = bracket_closure(h), flat = is_integrable(c);
  rep.add("horizontal-bracket", digest_of(prob, "horizontal-bracket", ""), bc == flat,
          {std::string("bracket closure = ") + (bc ? "yes" : "no"),
           std::string("integrable = ") + (flat ? "yes" : "no")});
  bool pc = p_power_closure(h), psi_zero = p_curvature_vanishes(c);
  rep.add("horizontal-p-power", digest_of(prob, "horizontal-p-power", ""), pc == psi_zero,
          {std::string("p-th power closure = ") + (pc ? "yes" : "no"),
           std::string("p-curvature zero = ") + (psi_zero ? "yes" : "no")});
  return rep;
}

Report cmd_cartier(const ParsedProblem& prob, const CommonFlags& flags) {
  Report rep;
  FrobeniusContext ctx = make_frobenius(prob.file.base_ring());
  std::uint32_t p = prob.file.p;
  bool ran = false;
  if (prob.file.lift) {
    ran = true;
    CartierSplitting z = cartier_splitting(ctx, *prob.file.lift);
    bool ok = true;
    std::vector<std::string> w;
    std::uint32_t bound = pick_bound(flags, prob, 2 * p + 2);
    for (std::size_t i = 0; i < ctx.base->nx(); ++i) {
      w.push_back("zeta(d" + ctx.base->xvars[i] + "') = " +
                  render_one_form(z.row(i), ctx.base, false));
      CartierResult cr = cartier_operator(ctx, z.row(i), bound);
      if (!cr.feasible) {
        ok = false;
        w.push_back("cartier operator infeasible at bound " + std::to_string(bound));
        continue;
      }
      for (std::size_t j = 0; j < ctx.base->nx(); ++j) {
        ModPoly expect = (i == j) ? ModPoly::one(ctx.twist) : ModPoly::zero(ctx.twist);
        if (!(cr.u[j] == expect)) ok = false;
      }
    }
    w.push_back(std::string("cartier o zeta = identity: ") + (ok ? "yes" : "no"));
    rep.add("cartier-splitting", digest_of(prob, "cartier-splitting", ""), ok, std::move(w));
  }
  if (prob.file.connection && prob.file.connection->mode == WeightMode::DR &&
      !prob.file.connection->ring->has_t) {
    ran = true;
    const Connection& c = *prob.file.connection;
    std::uint32_t bound = pick_bound(flags, prob, default_flat_degree_bound(c));
    DescendResult dr = cartier_descend(c, bound);
    std::vector<std::string> w;
    if (dr.ok)
      w.push_back("flat frame = " + dr.frame.render());
    else
      w.push_back("descent failed: " + dr.reason);
    rep.add("cartier-descend", digest_of(prob, "cartier-descend", std::to_string(bound)), dr.ok,
            std::move(w));
  }
  if (!ran)
    throw precondition_error("cartier needs a [lift] section or a dr [connection]");
  return rep;
}

Report cmd_theta_check(const ParsedProblem& prob, const CommonFlags& flags) {
  RingPtr ring = prob.file.base_ring();
  std::uint32_t p = prob.file.p;
  std::uint32_t level = pick_level(flags, prob, p * p);
  ThetaDiagrams d = theta_coalgebra_check(ring, level);
  Report rep;
  std::string params = "level=" + std::to_string(level);
  rep.add("theta-counit", digest_of(prob, "theta-counit", params), d.counit_ok, {});
  rep.add("theta-source-target", digest_of(prob, "theta-source-target", params),
          d.source_target_ok, {});
  std::vector<std::string> w;
  if (!d.witness.empty()) w.push_back(d.witness);
  rep.add("theta-comultiplication", digest_of(prob, "theta-comultiplication", params),
          d.comultiplication_ok, std::move(w));
  ThetaReesCompat trc = theta_rees_compat(ring, 3);
  std::vector<std::string> w2;
  if (!trc.witness.empty()) w2.push_back(trc.witness);
  rep.add("theta-filtration", digest_of(prob, "theta-filtration", params), trc.ok, std::move(w2));
  return rep;
}

Report cmd_rees(const ParsedProblem& prob) {
  Report rep;
  bool ran = false;
  if (prob.file.filtration) {
    ran = true;
    const FilteredModule& v = *prob.file.filtration;
    ReesModule rm = rees_build(v);
    ReesFiberModule f0 = rees_fiber(rm, 0);
    std::vector<std::string> w;
    std::string grading = "t=0 grading =";
    for (auto g : f0.grading) grading += " " + std::to_string(g);
    w.push_back(grading);
    bool frame_ok = rees_fiber(rm, 1).basis.rank() == v.rank;
    w.push_back(std::string("t=1 fiber frame invertible = ") + (frame_ok ? "yes" : "no"));
    rep.add("rees-fibers", digest_of(prob, "rees-fibers", ""), frame_ok, std::move(w));

    if (prob.file.connection && !prob.conj) {
      const Connection& c = *prob.file.connection;
      GriffithsClass g = griffiths_check(v, c);
      GriffithsClass g2 = griffiths_check_rees(v, c);
      std::vector<std::string> gw{std::string("classification = ") + griffiths_name(g)};
      rep.add("griffiths", digest_of(prob, "griffiths", ""), g == g2, std::move(gw));
      if (g != GriffithsClass::NEITHER) {
        std::vector<PolyMatrix> th = associated_higgs(v, c);
        bool zero = true;
        std::vector<std::string> hw;
        for (std::size_t i = 0; i < th.size(); ++i) {
          zero = zero && th[i].is_zero();
          hw.push_back("higgs(D" + std::to_string(i + 1) + ") = " + th[i].render());
        }
        rep.add("associated-higgs", digest_of(prob, "associated-higgs", ""),
                (g == GriffithsClass::PRESERVES) == zero, std::move(hw));
      }
    }
  }
  if (prob.conj && prob.file.connection && prob.file.psi) {
    ran = true;
    ConjTriple triple{*prob.file.connection, *prob.file.psi};
    MconjResult m = mconj_member(triple);
    std::vector<std::string> w;
    for (std::size_t i = 0; i < m.measured.size(); ++i)
      w.push_back("psi(D" + std::to_string(i + 1) + ") = " +
                  (triple.nabla.rank == 1 ? m.measured[i].at(0, 0).render()
                                          : m.measured[i].render()));
    w.push_back(std::string("integrable = ") + (m.integrable ? "yes" : "no"));
    w.push_back(std::string("member = ") + (m.member ? "yes" : "no"));
    rep.add("mconj-member", digest_of(prob, "mconj-member", ""), m.member, std::move(w));
  }
  if (!ran)
    throw precondition_error(
        "rees needs a [filtration] section, or mode conj with [connection] and [psi]");
  return rep;
}

Report cmd_deform(const ParsedProblem& prob, const CommonFlags& flags) {
  if (!prob.file.higgs) throw precondition_error("deform needs a [higgs] section");
  FrobeniusContext ctx = make_frobenius(prob.file.base_ring());
  std::uint32_t p = prob.file.p;
  std::vector<ModPoly> lift =
      prob.file.lift ? *prob.file.lift
                     : std::vector<ModPoly>(ctx.base->nx(), ModPoly::zero(ctx.base));
  CartierSplitting z = cartier_splitting(ctx, lift);
  std::uint32_t e = flags.exponent ? flags.exponent : prob.file.options.exponent.value_or(p);
  DeformResult d = conj_deform(*prob.file.higgs, z, e);
  Report rep;
  std::vector<std::string> w;
  for (std::size_t i = 0; i < d.raw_pcurv.size(); ++i)
    w.push_back("psi(D" + std::to_string(i + 1) + ") = " + d.raw_pcurv[i].render());
  w.push_back("kappa = " + std::to_string(d.kappa) + " ((p-1)! = -1 mod p)");
  w.push_back("measured t-exponent = " + std::to_string(d.measured_t_exponent));
  w.push_back(std::string("integrable = ") + (d.integrable ? "yes" : "no"));
  w.push_back(std::string("p-curvature = t^e * kappa * F*psi: ") +
              (d.matches_scaled ? "yes" : "no"));
  w.push_back(std::string("mconj membership (p-curvature = t^p psi): ") +
              (d.mconj_ok ? "yes" : "no"));
  if (e != p && d.measured_t_exponent >= 0 && std::uint32_t(d.measured_t_exponent) != p)
    w.push_back("note: measured exponent " + std::to_string(d.measured_t_exponent) +
                " differs from t^p; membership requires exponent = p");
  bool verdict = d.integrable && d.o_linear && d.matches_scaled && (e != p || d.mconj_ok);
  rep.add("deform", digest_of(prob, "deform", "e=" + std::to_string(e)), verdict, std::move(w));
  return rep;
}

Report cmd_selftest(std::uint64_t seed, std::size_t scale) {
  Report rep;
  for (const CheckResult& c : run_selftest(seed, scale)) {
    std::vector<std::string> w;
    if (!c.detail.empty()) w.push_back(c.detail);
    rep.add(c.name, fnv1a_hex("selftest/" + c.name + "/" + std::to_string(seed)), c.pass,
            std::move(w));
  }
  return rep;
}

int finish(Report& rep, const CommonFlags& flags,
           std::chrono::steady_clock::time_point start) {
  rep.total_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start)
                     .count();
  rep.print_human(std::cout, flags.quiet);
  if (!flags.json_path.empty()) rep.write_json(flags.json_path);
  return rep.all_pass() ? 0 : 1;
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"charp: exact characteristic-p differential algebra on affine patches"};
  app.require_subcommand(1);

  CommonFlags flags;
  std::string file;
  std::uint64_t seed = 0;
  std::size_t scale = 1;

  auto add_common = [&](CLI::App* sub, bool needs_file) {
    if (needs_file) sub->add_option("file", file, "problem file")->required();
    sub->add_option("--json", flags.json_path, "write NDJSON records to this path");
    sub->add_flag("--quiet", flags.quiet, "suppress witness lines");
    sub->add_option("--level", flags.level, "truncation level override");
    sub->add_option("--degree-bound", flags.degree_bound, "degree bound override");
    sub->add_option("--exponent", flags.exponent, "deformation t-exponent override");
  };

  CLI::App* curvature = app.add_subcommand("curvature", "curvature matrices K_ij");
  CLI::App* pcurv = app.add_subcommand("pcurvature", "p-curvature matrices psi(D_i)");
  CLI::App* stratify = app.add_subcommand("stratify", "Taylor stratification and cocycle checks");
  CLI::App* horizontal =
      app.add_subcommand("horizontal", "horizontal fields, bracket and p-th power closure");
  CLI::App* cartier =
      app.add_subcommand("cartier", "Cartier splitting verification and Cartier descent");
  CLI::App* theta = app.add_subcommand("theta-check", "theta coalgebra and filtration diagrams");
  CLI::App* rees = app.add_subcommand("rees", "Rees fibers, Griffiths class, associated Higgs");
  CLI::App* deform = app.add_subcommand("deform", "key deformation nabla_can + t^e zeta(F*psi)");
  CLI::App* selftest = app.add_subcommand("selftest", "run the full invariant suite");

  for (CLI::App* sub : {curvature, pcurv, stratify, horizontal, cartier, theta, rees, deform})
    add_common(sub, true);
  selftest->add_option("--json", flags.json_path, "write NDJSON records to this path");
  selftest->add_flag("--quiet", flags.quiet, "suppress witness lines");
  selftest->add_option("--seed", seed, "seed for the randomized suites");
  selftest->add_option("--scale", scale, "instance-count multiplier");

  CLI11_PARSE(app, argc, argv);

  auto start = std::chrono::steady_clock::now();
  try {
    Report rep;
    if (selftest->parsed()) {
      rep = cmd_selftest(seed, scale);
      return finish(rep, flags, start);
    }
    ParsedProblem prob = charp::parse_problem(read_file(file));
    if (curvature->parsed()) rep = cmd_curvature(prob);
    else if (pcurv->parsed()) rep = cmd_pcurvature(prob);
    else if (stratify->parsed()) rep = cmd_stratify(prob, flags);
    else if (horizontal->parsed()) rep = cmd_horizontal(prob);
    else if (cartier->parsed()) rep = cmd_cartier(prob, flags);
    else if (theta->parsed()) rep = cmd_theta_check(prob, flags);
    else if (rees->parsed()) rep = cmd_rees(prob);
    else if (deform->parsed()) rep = cmd_deform(prob, flags);
    return finish(rep, flags, start);
  } catch (const charp::parse_error& e) {
    std::cerr << "parse error: " << e.what() << "\n";
    return 2;
  } catch (const charp::precondition_error& e) {
    std::cerr << "precondition violated: " << e.what() << "\n";
    return 3;
  } catch (const charp::invariant_error& e) {
    std::cerr << "internal invariant failure: " << e.what() << "\n";
    return 4;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 4;
  }
}
