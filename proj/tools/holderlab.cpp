// holderlab: batch harness over the library. Each subcommand writes
// <out-dir>/<name>.json (sorted keys, 17 significant digits) and, where a
// table exists, <name>.csv; solution fields go next to them in the binary
// field container. Exit status: 0 checks pass, 1 a check failed, 2 bad
// configuration or input.

#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <functional>
#include <iostream>
#include <map>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "holderlab/apply.hpp"
#include "holderlab/certify.hpp"
#include "holderlab/families.hpp"
#include "holderlab/field_io.hpp"
#include "holderlab/holder.hpp"
#include "holderlab/lpdecomp.hpp"
#include "holderlab/problems.hpp"
#include "holderlab/report.hpp"

using namespace holderlab;
namespace fs = std::filesystem;

namespace {

struct Artifacts {
  json report;
  std::optional<std::string> csv;
  std::vector<std::pair<std::string, SampledField>> fields;  // file stem, field
  bool pass = true;
};

struct Common {
  std::string out_dir = "holderlab_out";
  unsigned long long seed = 1;
  bool dry_run = false;
};

struct Command {
  CLI::App* app = nullptr;
  std::function<json()> plan;  // validates the options; throws invalid_argument
  std::function<Artifacts()> run;
};

void add_common(CLI::App* sub, Common& c) {
  sub->add_option("--out-dir", c.out_dir, "directory for reports and fields")->capture_default_str();
  sub->add_option("--seed", c.seed, "base seed; ensemble member i uses seed + i")->capture_default_str();
  sub->add_flag("--dry-run", c.dry_run, "validate and print the resolved plan without computing");
}

/// Atomically writes every artifact; fields go through a temporary name and
/// are renamed into place together with their JSON sidecar.
void write_artifacts(const std::string& name, const Artifacts& a, const std::string& out_dir) {
  const fs::path dir(out_dir);
  fs::create_directories(dir);
  json report = a.report;
  report["pass"] = a.pass;
  write_file_atomic(dir / (name + ".json"), dump_json(report));
  if (a.csv) write_file_atomic(dir / (name + ".csv"), *a.csv);
  for (const auto& [stem, field] : a.fields) {
    const fs::path final_path = dir / (stem + ".hlf");
    const fs::path tmp = dir / (stem + ".hlf.tmp");
    write_field(field, tmp.string());
    fs::rename(tmp, final_path);
    fs::rename(fs::path(tmp.string() + ".json"), fs::path(final_path.string() + ".json"));
  }
}

Grid cube_grid(std::size_t dims, std::size_t n, double L) {
  if (dims == 0) throw std::invalid_argument("--dims must be positive");
  return Grid::cube(dims, L, n);
}

std::vector<double> exponents_or_default(const std::vector<double>& given, const Symbol* m, std::size_t dims) {
  if (!given.empty()) {
    if (given.size() != dims)
      throw std::invalid_argument("--exponents lists " + std::to_string(given.size()) + " values for " +
                                  std::to_string(dims) + " axes");
    return given;
  }
  std::vector<double> e(dims, 1.0);
  if (m)
    for (std::size_t i = 0; i < dims; ++i) e[i] = 1.0 / m->weights[i];
  return e;
}

AnisotropyProfile make_profile(double gamma, const std::vector<double>& exps, const std::vector<std::size_t>& smooth) {
  std::vector<bool> gained(exps.size(), true);
  for (auto a : smooth) {
    if (a >= exps.size()) throw std::invalid_argument("--smooth-axes names axis " + std::to_string(a) + " out of range");
    gained[a] = false;
  }
  auto p = AnisotropyProfile::from_exponents(gamma, exps, gained);
  p.validate(exps.size());
  return p;
}

std::vector<std::vector<std::size_t>> parse_groups(const std::vector<std::string>& groups, std::size_t dims) {
  std::vector<std::vector<std::size_t>> out;
  for (const auto& g : groups) {
    std::vector<std::size_t> axes;
    std::stringstream ss(g);
    std::string item;
    while (std::getline(ss, item, ',')) {
      std::size_t used = 0;
      unsigned long v = 0;
      try {
        v = std::stoul(item, &used);
      } catch (const std::exception&) {
        used = 0;
      }
      if (used == 0 || used != item.size()) throw std::invalid_argument("--group '" + g + "' is not a comma list of axes");
      axes.push_back(v);
    }
    out.push_back(axes);
  }
  if (out.empty()) {
    out.push_back({});
    for (std::size_t i = 0; i < dims; ++i) out[0].push_back(i);
  }
  return out;
}

GroupedForm parse_form(const std::string& s) {
  if (s == "grouped_sufficient") return GroupedForm::sufficient;
  if (s == "grouped_gain") return GroupedForm::gain;
  if (s == "special_last") return GroupedForm::special_last;
  if (s == "per_axis") return GroupedForm::per_axis;
  throw std::invalid_argument("unknown certificate form '" + s +
                              "' (valid: isotropic, grouped_sufficient, grouped_gain, special_last, per_axis)");
}

double max_abs_diff(const SampledField& a, const SampledField& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

// ---------------------------------------------------------------------------
// decompose

struct DecomposeOpts {
  std::size_t dims = 2, n = 64, samples = 10000;
  double L = std::numbers::pi, sharpness = 1.0;
  std::vector<double> exponents;
  std::string symbol;
  double gamma = 0.5;
};

Command make_decompose(CLI::App& app, Common& c) {
  auto o = std::make_shared<DecomposeOpts>();
  Command cmd;
  cmd.app = app.add_subcommand("decompose", "dyadic block energies, partition residual and moment integrals");
  add_common(cmd.app, c);
  cmd.app->add_option("--dims", o->dims)->capture_default_str();
  cmd.app->add_option("--n", o->n, "points per axis")->capture_default_str();
  cmd.app->add_option("--L", o->L, "half box length")->capture_default_str();
  cmd.app->add_option("--exponents", o->exponents, "per-axis exponents (default: all 1, or 1/weights of --symbol)");
  cmd.app->add_option("--sharpness", o->sharpness)->capture_default_str();
  cmd.app->add_option("--samples", o->samples, "random frequencies for the partition residual")->capture_default_str();
  cmd.app->add_option("--symbol", o->symbol, "symbol for localized-kernel moment integrals (optional)");
  cmd.app->add_option("--gamma", o->gamma, "moment weight exponent")->capture_default_str();
  auto resolve = [o, &c] {
    std::optional<Symbol> m;
    if (!o->symbol.empty()) m = make_symbol(o->symbol);
    const std::size_t dims = m ? m->dims : o->dims;
    const auto e = exponents_or_default(o->exponents, m ? &*m : nullptr, dims);
    const Grid g = cube_grid(dims, o->n, o->L);
    const auto profile = make_profile(o->gamma, e, {0});
    if (m) check_symbol_matches(*m, e);
    build_cutoffs(o->sharpness);
    return std::make_tuple(m, e, g, profile);
  };
  cmd.plan = [o, &c, resolve] {
    auto [m, e, g, profile] = resolve();
    return json{{"subcommand", "decompose"}, {"dims", g.dims()},       {"n", o->n},
                {"L", o->L},                 {"exponents", e},         {"sharpness", o->sharpness},
                {"samples", o->samples},     {"symbol", o->symbol},    {"seed", c.seed},
                {"levels", json::array({default_levels(g, e).j_min, default_levels(g, e).j_max})}};
  };
  cmd.run = [o, &c, resolve] {
    auto [m, e, g, profile] = resolve();
    const auto cut = build_cutoffs(o->sharpness);
    const auto xs = sample_shell(e, 0.125, 8.0, o->samples, c.seed);
    const double residual = partition_residual(e, cut, xs, -6, 6);
    const auto levels = default_levels(g, e);
    const auto u = band_limited_field(g, o->n / 2 - 2, c.seed);
    const auto blocks = block_decompose(u, e, cut, levels);
    SampledField sum = SampledField::zeros(g);
    for (const auto& b : blocks) sum = sum + b;
    const SampledField spec = forward_transform(u);
    SampledField mean = SampledField::zeros(g);
    {
      std::vector<complex> dc(g.size(), spec[0] / (g.box_volume()));
      mean = SampledField(g, std::move(dc), Side::physical);
    }
    const double recon = max_abs_diff(sum + mean, u) / u.max_abs();
    std::vector<std::string> header{"level", "block_energy"};
    if (m) header.insert(header.end(), {"moment_integral", "edge_fraction", "kernel_extent"});
    CsvTable t(header);
    json lv = json::array();
    for (std::size_t b = 0; b < blocks.size(); ++b) {
      const int j = levels.j_min + static_cast<int>(b);
      const double energy = std::pow(blocks[b].l2_norm(), 2);
      std::vector<std::string> row{std::to_string(j), format_number(energy)};
      json entry{{"level", j}, {"block_energy", energy}};
      if (m) {
        const auto am = moment_integral_adaptive(*m, profile, cut, j, minimal_kernel_grid(e));
        row.insert(row.end(), {format_number(am.moment.value), format_number(am.moment.edge_fraction),
                               format_number(am.grid.extent(0))});
        entry["moment_integral"] = am.moment.value;
        entry["edge_fraction"] = am.moment.edge_fraction;
      }
      t.add_row(row);
      lv.push_back(entry);
    }
    Artifacts a;
    a.report = {{"subcommand", "decompose"}, {"exponents", e},          {"partition_residual", residual},
                {"samples", o->samples},     {"reconstruction_error", recon}, {"levels", lv},
                {"seed", c.seed}};
    a.csv = t.str();
    a.pass = residual < 1e-12 && recon < 1e-10;
    return a;
  };
  return cmd;
}

// ---------------------------------------------------------------------------
// apply / gain

struct GainOpts {
  std::string symbol = "riesz{k=2,l=1}";
  std::size_t n = 64;
  double L = std::numbers::pi;
  double gamma = 0.5;
  std::vector<double> exponents;
  std::vector<std::size_t> smooth_axes{0};
  std::size_t ensemble = 1;
  std::string input;
  double bound_factor = 50.0;
};

void add_gain_options(CLI::App* sub, GainOpts& o, bool ensemble) {
  sub->add_option("--symbol", o.symbol, "symbol spec, e.g. riesz{k=2,l=1}")->capture_default_str();
  sub->add_option("--n", o.n, "points per axis")->capture_default_str();
  sub->add_option("--L", o.L, "half box length")->capture_default_str();
  sub->add_option("--gamma", o.gamma)->capture_default_str();
  sub->add_option("--exponents", o.exponents, "per-axis alpha/beta (default 1/weights of the symbol)");
  sub->add_option("--smooth-axes", o.smooth_axes, "axes of the Hoelder data group")->capture_default_str();
  if (ensemble) {
    sub->add_option("--ensemble", o.ensemble, "ensemble size")->capture_default_str();
    sub->add_option("--bound-factor", o.bound_factor, "stable when max <= factor * median")->capture_default_str();
  } else {
    sub->add_option("--input", o.input, "input field file (default: a seeded partial-Hoelder field)");
  }
}

Command make_apply(CLI::App& app, Common& c) {
  auto o = std::make_shared<GainOpts>();
  Command cmd;
  cmd.app = app.add_subcommand("apply", "apply a multiplier to one field and report the Hoelder gain");
  add_common(cmd.app, c);
  add_gain_options(cmd.app, *o, false);
  auto resolve = [o] {
    const Symbol m = make_symbol(o->symbol);
    const auto p = make_profile(o->gamma, exponents_or_default(o->exponents, &m, m.dims), o->smooth_axes);
    return std::make_pair(m, p);
  };
  cmd.plan = [o, &c, resolve] {
    auto [m, p] = resolve();
    return json{{"subcommand", "apply"}, {"symbol", m.describe()}, {"profile", profile_json(p)}, {"n", o->n},
                {"L", o->L},             {"input", o->input},     {"seed", c.seed}};
  };
  cmd.run = [o, &c, resolve] {
    auto [m, p] = resolve();
    const SampledField u = o->input.empty() ? partial_holder_field(cube_grid(m.dims, o->n, o->L), p, c.seed)
                                            : read_field(o->input);
    if (u.grid().dims() != m.dims) throw std::invalid_argument("input field and symbol dimensions differ");
    const GainReport r = gain_experiment(m, p, u);
    Artifacts a;
    a.report = r.to_json();
    a.report["subcommand"] = "apply";
    a.report["seed"] = c.seed;
    a.csv = r.to_csv();
    a.fields.emplace_back("apply_output", apply_multiplier(m, u).real_part());
    // The gain is claimed on the gained axes; smooth-axis fits are reported.
    a.pass = std::all_of(r.axes.begin(), r.axes.end(),
                         [](const GainAxis& x) { return x.group != "gained" || x.meets_target; });
    return a;
  };
  return cmd;
}

Command make_gain(CLI::App& app, Common& c) {
  auto o = std::make_shared<GainOpts>();
  Command cmd;
  cmd.app = app.add_subcommand("gain", "seeded gain ensemble for a multiplier");
  add_common(cmd.app, c);
  add_gain_options(cmd.app, *o, true);
  auto resolve = [o] {
    if (o->ensemble == 0) throw std::invalid_argument("--ensemble must be positive");
    const Symbol m = make_symbol(o->symbol);
    const auto p = make_profile(o->gamma, exponents_or_default(o->exponents, &m, m.dims), o->smooth_axes);
    return std::make_pair(m, p);
  };
  cmd.plan = [o, &c, resolve] {
    auto [m, p] = resolve();
    return json{{"subcommand", "gain"}, {"symbol", m.describe()}, {"profile", profile_json(p)},
                {"n", o->n},            {"L", o->L},             {"ensemble", o->ensemble},
                {"seed", c.seed},       {"bound_factor", o->bound_factor}};
  };
  cmd.run = [o, &c, resolve] {
    auto [m, p] = resolve();
    const Grid g = cube_grid(m.dims, o->n, o->L);
    const auto s = gain_ensemble(
        m, p, [&](unsigned long long seed) { return partial_holder_field(g, p, seed); }, o->ensemble, c.seed, {},
        o->bound_factor);
    Artifacts a;
    a.report = s.to_json();
    a.report["subcommand"] = "gain";
    a.report["symbol"] = m.describe();
    a.report["profile"] = profile_json(p);
    json members = json::array();
    std::size_t meeting = 0;
    for (const auto& r : s.members) {
      members.push_back(r.to_json());
      meeting += r.all_meet_target() ? 1 : 0;
    }
    a.report["members"] = members;
    a.report["members_meeting_target"] = meeting;
    a.csv = s.to_csv();
    a.pass = s.stable;
    return a;
  };
  return cmd;
}

// ---------------------------------------------------------------------------
// certify

struct CertifyOpts {
  std::string symbol = "riesz{k=2,l=1}";
  double p = 2.0, gamma = 0.5;
  std::vector<int> s;
  std::string form = "isotropic";
  std::vector<std::string> groups;
  std::size_t lambda_points = 33;
};

Command make_certify(CLI::App& app, Common& c) {
  auto o = std::make_shared<CertifyOpts>();
  Command cmd;
  cmd.app = app.add_subcommand("certify", "lambda-stability certificate of the annulus derivative norms");
  add_common(cmd.app, c);
  cmd.app->add_option("--symbol", o->symbol)->capture_default_str();
  cmd.app->add_option("--p", o->p, "integrability exponent in (1,2]")->capture_default_str();
  cmd.app->add_option("--s", o->s, "Sobolev order(s); one per group for the grouped forms");
  cmd.app->add_option("--gamma", o->gamma)->capture_default_str();
  cmd.app->add_option("--form", o->form, "isotropic|grouped_sufficient|grouped_gain|special_last|per_axis")
      ->capture_default_str();
  cmd.app->add_option("--group", o->groups, "axis group as a comma list, repeatable (default: one group)");
  cmd.app->add_option("--lambda-points", o->lambda_points, "geometric lambda grid on [2^-8, 2^8]")
      ->capture_default_str();
  auto certify = [o](bool dry) {
    const Symbol m = make_symbol(o->symbol);
    CertifyOptions opt;
    if (o->lambda_points < 2) throw std::invalid_argument("--lambda-points must be at least 2");
    opt.lambda_grid = geometric_lambda_grid(-8.0, 8.0, o->lambda_points);
    if (dry) {
      // Threshold checks only: a two-point sweep with the same validation.
      opt.lambda_grid = geometric_lambda_grid(-1.0, 1.0, 2);
      opt.richardson = false;
    }
    if (o->form == "isotropic") {
      if (o->s.size() != 1) throw std::invalid_argument("isotropic form takes exactly one --s");
      const auto profile = AnisotropyProfile::smooth(o->gamma, exponents_or_default({}, &m, m.dims));
      return certify_isotropic(m, profile, o->p, o->s[0], opt);
    }
    return certify_grouped(m, parse_groups(o->groups, m.dims), o->s, o->p, parse_form(o->form), o->gamma, opt);
  };
  cmd.plan = [o, &c, certify] {
    const Certificate cert = certify(true);
    return json{{"subcommand", "certify"}, {"symbol", cert.symbol},       {"p", o->p},
                {"s", o->s},               {"gamma", o->gamma},           {"form", cert.form},
                {"threshold", cert.threshold}, {"lambda_points", o->lambda_points}, {"groups", cert.groups},
                {"seed", c.seed}};
  };
  cmd.run = [certify] {
    const Certificate cert = certify(false);
    Artifacts a;
    a.report = cert.to_json();
    a.report["subcommand"] = "certify";
    a.csv = cert.to_csv();
    a.pass = cert.pass;
    return a;
  };
  return cmd;
}

// ---------------------------------------------------------------------------
// seminorm

struct SeminormOpts {
  std::string input;
  std::size_t dims = 1, n = 512, axis = 0;
  double L = 4.0, exponent = 0.5;
  std::string family = "power";
  std::string boundary = "interior";
  std::vector<double> l;
  std::optional<double> expect;
  double tolerance = 0.03;
};

Command make_seminorm(CLI::App& app, Common& c) {
  auto o = std::make_shared<SeminormOpts>();
  Command cmd;
  cmd.app = app.add_subcommand("seminorm", "per-axis Hoelder seminorms and fitted exponents of a field");
  add_common(cmd.app, c);
  cmd.app->add_option("--input", o->input, "field file (default: a generated --family field)");
  cmd.app->add_option("--family", o->family, "power: |x_axis|^exponent; power_bump: the same times a bump")
      ->capture_default_str();
  cmd.app->add_option("--boundary", o->boundary, "periodic|interior differences")->capture_default_str();
  cmd.app->add_option("--dims", o->dims)->capture_default_str();
  cmd.app->add_option("--n", o->n)->capture_default_str();
  cmd.app->add_option("--L", o->L)->capture_default_str();
  cmd.app->add_option("--axis", o->axis, "singular axis of the default field")->capture_default_str();
  cmd.app->add_option("--exponent", o->exponent, "exponent of the default field")->capture_default_str();
  cmd.app->add_option("--l", o->l, "seminorm order per axis (default: --exponent on every axis)");
  cmd.app->add_option("--expect", o->expect, "expected fitted exponent on --axis; checked within --tolerance");
  cmd.app->add_option("--tolerance", o->tolerance)->capture_default_str();
  auto field = [o](bool build) -> std::optional<SampledField> {
    if (!o->input.empty()) return read_field(o->input);
    if (o->axis >= o->dims) throw std::invalid_argument("--axis out of range");
    if (!(o->exponent > 0.0)) throw std::invalid_argument("--exponent must be positive");
    if (o->family != "power" && o->family != "power_bump")
      throw std::invalid_argument("unknown field family '" + o->family + "' (valid: power, power_bump)");
    const Grid g = cube_grid(o->dims, o->n, o->L);
    if (!build) return std::nullopt;
    if (o->family == "power_bump") return power_bump_field(g, o->axis, o->exponent);
    const std::size_t axis = o->axis;
    const double e = o->exponent;
    return sample([axis, e](std::span<const double> x) { return std::pow(std::abs(x[axis]), e); }, g);
  };
  auto boundary = [o] {
    if (o->boundary == "periodic") return Boundary::periodic;
    if (o->boundary == "interior") return Boundary::interior;
    throw std::invalid_argument("unknown boundary '" + o->boundary + "' (valid: periodic, interior)");
  };
  cmd.plan = [o, &c, field, boundary] {
    field(false);
    boundary();
    return json{{"subcommand", "seminorm"}, {"input", o->input}, {"family", o->family},
                {"boundary", o->boundary},  {"dims", o->dims},   {"n", o->n},
                {"L", o->L},                {"axis", o->axis},   {"exponent", o->exponent}, {"l", o->l},
                {"seed", c.seed}};
  };
  cmd.run = [o, field, boundary] {
    const SampledField u = *field(true);
    std::vector<double> l = o->l;
    if (l.empty()) l.assign(u.grid().dims(), o->exponent);
    SeminormOptions so;
    so.boundaries.assign(u.grid().dims(), boundary());
    const SeminormReport r = aniso_norm(u, l, so);
    Artifacts a;
    a.report = r.to_json();
    a.report["subcommand"] = "seminorm";
    a.csv = r.to_csv();
    if (o->expect) {
      if (o->axis >= r.per_axis.size()) throw std::invalid_argument("--axis out of range for the field");
      const auto& fit = r.per_axis[o->axis].fitted_exponent;
      a.pass = fit && std::abs(*fit - *o->expect) <= o->tolerance;
      a.report["expected_exponent"] = *o->expect;
    }
    return a;
  };
  return cmd;
}

// ---------------------------------------------------------------------------
// example1 / example2

struct Example1Opts {
  std::size_t dims = 3, n = 128;
  double gamma = 0.6;
  bool jumps = false;
  std::vector<std::size_t> counter_points{32, 64, 128, 256};
};

Command make_example1(CLI::App& app, Common& c) {
  auto o = std::make_shared<Example1Opts>();
  Command cmd;
  cmd.app = app.add_subcommand("example1", "Poisson example: second derivatives of Delta^{-1} f, and the counterexample");
  add_common(cmd.app, c);
  cmd.app->add_option("--dims", o->dims)->capture_default_str();
  cmd.app->add_option("--n", o->n)->capture_default_str();
  cmd.app->add_option("--gamma", o->gamma)->capture_default_str();
  cmd.app->add_flag("--jumps", o->jumps, "data with jump discontinuities in the other axes");
  cmd.app->add_option("--counter-points", o->counter_points, "resolutions for the counterexample")
      ->capture_default_str();
  auto check = [o] {
    if (!(o->gamma > 0.0 && o->gamma < 1.0)) throw std::invalid_argument("--gamma must lie in (0,1)");
    if (o->dims < 2) throw std::invalid_argument("--dims must be at least 2");
    if (o->counter_points.size() < 3) throw std::invalid_argument("--counter-points needs at least three resolutions");
    return cube_grid(o->dims, o->n, std::numbers::pi);
  };
  cmd.plan = [o, &c, check] {
    check();
    return json{{"subcommand", "example1"}, {"dims", o->dims},   {"n", o->n},   {"gamma", o->gamma},
                {"jumps", o->jumps},        {"counter_points", o->counter_points}, {"seed", c.seed}};
  };
  cmd.run = [o, &c, check] {
    const Grid g = check();
    const auto f = example1_data(g, o->gamma, c.seed, o->jumps);
    const auto r = example1_poisson(f, o->gamma);
    const auto t = example1_counterexample(o->counter_points);
    Artifacts a;
    a.report = {{"subcommand", "example1"}, {"poisson", r.to_json()}, {"counterexample", t.to_json()},
                {"min_fit", r.min_fit()},   {"seed", c.seed}};
    a.csv = r.to_csv();
    a.pass = r.min_fit() >= o->gamma - 0.05 && t.log_growth && t.mixed_bounded;
    return a;
  };
  return cmd;
}

struct Example2Opts {
  std::size_t n = 256;
  double gamma = 0.75, a = 1.0;
  bool smooth = false;
};

Command make_example2(CLI::App& app, Common& c) {
  auto o = std::make_shared<Example2Opts>();
  Command cmd;
  cmd.app = app.add_subcommand("example2", "heat example: u_t and u_tx of the heat resolvent");
  add_common(cmd.app, c);
  cmd.app->add_option("--n", o->n)->capture_default_str();
  cmd.app->add_option("--gamma", o->gamma, "time exponent in (1/2, 1)")->capture_default_str();
  cmd.app->add_option("--a", o->a, "diffusion coefficient")->capture_default_str();
  cmd.app->add_flag("--smooth", o->smooth, "data without jumps in x");
  auto check = [o] {
    if (!(o->gamma > 0.5 && o->gamma < 1.0)) throw std::invalid_argument("--gamma must lie in (1/2, 1)");
    if (!(o->a > 0.0)) throw std::invalid_argument("--a must be positive");
    return cube_grid(2, o->n, std::numbers::pi);
  };
  cmd.plan = [o, &c, check] {
    check();
    return json{{"subcommand", "example2"}, {"n", o->n}, {"gamma", o->gamma}, {"a", o->a},
                {"jumps", !o->smooth},      {"seed", c.seed}};
  };
  cmd.run = [o, &c, check] {
    const Grid g = check();
    const auto r = example2_heat(example2_data(g, o->gamma, c.seed, !o->smooth), o->gamma, o->a);
    Artifacts a;
    a.report = r.to_json();
    a.report["subcommand"] = "example2";
    a.report["seed"] = c.seed;
    a.csv = r.to_csv();
    a.pass = r.ut_space_fit() >= 2.0 * o->gamma - 0.1 && r.mixed_space_fit() >= 2.0 * o->gamma - 1.0 - 0.05;
    return a;
  };
  return cmd;
}

// ---------------------------------------------------------------------------
// ch1 / ch2

struct ChOpts {
  SchauderSetup setup;
  std::size_t ensemble = 0;
  bool refine = true;
  bool write_fields = true;
};

Command make_ch(CLI::App& app, Common& c, TraceVariant variant) {
  auto o = std::make_shared<ChOpts>();
  const std::string name = variant == TraceVariant::laplace_dynamic ? "ch1" : "ch2";
  Command cmd;
  cmd.app = app.add_subcommand(name, variant == TraceVariant::laplace_dynamic
                                         ? "half-space problem with u_t - a Delta' u = h on the boundary"
                                         : "half-space problem with u_t - a du/dz = h on the boundary");
  add_common(cmd.app, c);
  auto& s = o->setup;
  cmd.app->add_option("--a", s.a)->capture_default_str();
  cmd.app->add_option("--gamma", s.gamma)->capture_default_str();
  cmd.app->add_option("--space-dims", s.space_dims, "boundary space axes")->capture_default_str();
  cmd.app->add_option("--t-points", s.t_points)->capture_default_str();
  cmd.app->add_option("--x-points", s.x_points)->capture_default_str();
  cmd.app->add_option("--depth-points", s.depth_points)->capture_default_str();
  cmd.app->add_option("--t-extent", s.t_extent, "half period in t")->capture_default_str();
  cmd.app->add_option("--x-extent", s.x_extent, "half period in x'")->capture_default_str();
  cmd.app->add_option("--depth", s.depth, "box depth H (0: automatic)")->capture_default_str();
  cmd.app->add_option("--ensemble", o->ensemble, "Schauder ensemble size (0: one solve)")->capture_default_str();
  cmd.app->add_option("--bound-factor", s.bound_factor)->capture_default_str();
  cmd.app->add_flag("!--no-refine", o->refine, "skip the 2x refinement run");
  cmd.app->add_flag("!--no-fields", o->write_fields, "do not write solution fields");
  auto check = [o] {
    const auto& s = o->setup;
    if (!(s.a > 0.0)) throw std::invalid_argument("--a must be positive");
    if (!(s.gamma > 0.0 && s.gamma < 1.0)) throw std::invalid_argument("--gamma must lie in (0,1)");
    if (s.space_dims == 0) throw std::invalid_argument("--space-dims must be positive");
    if (s.depth_points < 4 || s.depth_points % 2) throw std::invalid_argument("--depth-points must be even and >= 4");
    return s.boundary_grid();
  };
  cmd.plan = [o, &c, check, name, variant] {
    check();
    return json{{"subcommand", name}, {"variant", to_string(variant)}, {"setup", o->setup.to_json()},
                {"ensemble", o->ensemble}, {"refine", o->refine}, {"seed", c.seed}};
  };
  cmd.run = [o, &c, check, name, variant] {
    const Grid gb = check();
    Artifacts a;
    if (o->ensemble > 0) {
      if (o->refine) {
        const auto r = schauder_refinement(variant, o->ensemble, c.seed, o->setup);
        a.report = r.to_json();
        a.csv = r.coarse.to_csv();
        a.pass = r.passes();
      } else {
        const auto st = schauder_ratio_experiment(variant, o->ensemble, c.seed, o->setup);
        a.report = st.to_json();
        a.csv = st.to_csv();
        a.pass = st.stable();
      }
    } else {
      HalfSpaceOptions opt;
      opt.gamma = o->setup.gamma;
      opt.depth_points = o->setup.depth_points;
      opt.depth = o->setup.depth;
      const auto h = causal_dipole_data(gb, c.seed);
      const auto sol = solve({variant, o->setup.a, h}, opt);
      a.report = sol.to_json();
      a.pass = sol.trace_residual < 1e-9 && sol.decay_at_depth < sol.decay_tolerance && sol.boundary_residual < 1e-6;
      if (o->write_fields) {
        a.fields.emplace_back(name + "_data", h);
        a.fields.emplace_back(name + "_trace", sol.rho);
        a.fields.emplace_back(name + "_solution", sol.u);
      }
    }
    a.report["subcommand"] = name;
    a.report["seed"] = c.seed;
    return a;
  };
  return cmd;
}

// ---------------------------------------------------------------------------
// oracle

struct OracleOpts {
  std::vector<double> a{1.0, 2.5};
  std::size_t n = 32, heat_points = 128, collocation_points = 48;
  std::vector<std::string> kinds{"denominator", "heat", "reduction"};
};

Command make_oracle(CLI::App& app, Common& c) {
  auto o = std::make_shared<OracleOpts>();
  Command cmd;
  cmd.app = app.add_subcommand("oracle", "boundary-symbol ODE oracle, heat convolution oracle, reduction check");
  add_common(cmd.app, c);
  cmd.app->add_option("--a", o->a, "coefficients to test")->capture_default_str();
  cmd.app->add_option("--n", o->n, "frequency grid size for the denominator comparison")->capture_default_str();
  cmd.app->add_option("--heat-points", o->heat_points, "points per axis of the heat oracle grid")
      ->capture_default_str();
  cmd.app->add_option("--collocation-points", o->collocation_points)->capture_default_str();
  cmd.app->add_option("--kind", o->kinds, "denominator|heat|reduction, repeatable")->capture_default_str();
  auto check = [o] {
    for (const auto& k : o->kinds)
      if (k != "denominator" && k != "heat" && k != "reduction")
        throw std::invalid_argument("unknown oracle kind '" + k + "' (valid: denominator, heat, reduction)");
    for (double a : o->a)
      if (!(a > 0.0)) throw std::invalid_argument("--a values must be positive");
    if (o->n < 2 || o->n % 2) throw std::invalid_argument("--n must be even and >= 2");
  };
  cmd.plan = [o, &c, check] {
    check();
    return json{{"subcommand", "oracle"}, {"a", o->a}, {"n", o->n}, {"heat_points", o->heat_points},
                {"collocation_points", o->collocation_points}, {"kinds", o->kinds}, {"seed", c.seed}};
  };
  cmd.run = [o, &c, check] {
    check();
    Artifacts a;
    a.report["subcommand"] = "oracle";
    CsvTable t({"kind", "a", "metric", "value"});
    auto has = [&](const char* k) { return std::find(o->kinds.begin(), o->kinds.end(), k) != o->kinds.end(); };
    if (has("denominator")) {
      OracleOptions oo;
      oo.collocation_points = o->collocation_points;
      json arr = json::array();
      for (double av : o->a) {
        const auto cmp = ch_denominator_comparison(av, o->n, oo);
        arr.push_back(cmp.to_json());
        t.add_row({"denominator", format_number(av), "max_rel_error", format_number(cmp.max_rel_error)});
        t.add_row({"denominator", format_number(av), "max_rel_error_unscaled", format_number(cmp.max_rel_error_unscaled)});
        a.pass = a.pass && cmp.a_multiplies_fraction();
      }
      a.report["denominator"] = arr;
    }
    if (has("heat")) {
      const Grid g({8.0, std::numbers::pi / 2}, {o->heat_points, o->heat_points});
      json arr = json::array();
      for (double av : o->a) {
        const HeatDipoleData d;
        TraceDiagnostics diag;
        const auto rho = heat_boundary_trace(heat_dipole_data(g, d), av, &diag);
        const double rel = relative_l2(rho, heat_convolution_oracle(g, av, d));
        arr.push_back({{"a", av}, {"relative_l2", rel}, {"trace", diag.to_json()}});
        t.add_row({"heat", format_number(av), "relative_l2", format_number(rel)});
        a.pass = a.pass && rel < 1e-6 && diag.causality_residual < 1e-8;
      }
      a.report["heat"] = arr;
    }
    if (has("reduction")) {
      const Grid g({4.0, 4.0}, {128, 128});
      const auto h = band_limited_field(g, 60, c.seed);
      json arr = json::array();
      for (double av : o->a) {
        const auto r = ch_reduction_check(h, av, 1, {3});
        arr.push_back(r.to_json());
        for (const auto& l : r.levels)
          t.add_row({"reduction", format_number(av), "ratio_level_" + std::to_string(l.level), format_number(l.ratio)});
        a.pass = a.pass && r.passes();
      }
      a.report["reduction"] = arr;
    }
    a.report["seed"] = c.seed;
    a.csv = t.str();
    return a;
  };
  return cmd;
}

// ---------------------------------------------------------------------------
// selftest: a fast seeded pass over every module.

Command make_selftest(CLI::App& app, Common& c) {
  Command cmd;
  cmd.app = app.add_subcommand("selftest", "quick deterministic run over every module");
  add_common(cmd.app, c);
  cmd.plan = [&c] {
    return json{{"subcommand", "selftest"},
                {"seed", c.seed},
                {"checks", json::array({"partition", "transform", "seminorm", "certify", "gain", "example2", "oracle",
                                        "heat_trace", "ch1", "ch2"})}};
  };
  cmd.run = [&c] {
    Artifacts a;
    CsvTable t({"check", "value", "bound", "pass"});
    json checks;
    auto record = [&](const std::string& name, double value, double bound, bool below) {
      const bool ok = below ? value < bound : value >= bound;
      t.add_row({name, format_number(value), format_number(bound), ok ? "true" : "false"});
      checks[name] = {{"value", value}, {"bound", bound}, {"pass", ok}};
      a.pass = a.pass && ok;
    };
    const auto cut = build_cutoffs();
    record("partition_residual", partition_residual({1.0, 0.5}, cut, sample_shell({1.0, 0.5}, 0.125, 8.0, 2000, c.seed), -6, 6),
           1e-12, true);
    {
      const Grid g = Grid::cube(2, 2.0, 32);
      const auto u = band_limited_field(g, 12, c.seed);
      record("transform_roundtrip", max_abs_diff(inverse_transform(forward_transform(u)), u) / u.max_abs(), 1e-12, true);
    }
    {
      const auto u = sample([](std::span<const double> x) { return std::sqrt(std::abs(x[0])); }, Grid({4.0}, {512}));
      record("seminorm_unit_error", std::abs(partial_seminorm(u, 0, 0.5, 1, Boundary::interior) - 1.0), 0.02, true);
      record("seminorm_fit_error", std::abs(fit_exponent(u, 0, 1, Boundary::interior).value_or(0.0) - 0.5), 0.03, true);
    }
    {
      CertifyOptions opt;
      opt.lambda_grid = geometric_lambda_grid(-8.0, 8.0, 9);
      const auto cert = certify_isotropic(riesz_second_order(2, 1, 0), AnisotropyProfile::smooth(0.5, {1, 1}), 2.0, 2, opt);
      record("certify_riesz_drift", cert.drift, 0.01, true);
    }
    {
      const Grid g = Grid::cube(2, std::numbers::pi, 64);
      const auto p = AnisotropyProfile::from_exponents(0.5, {1.0, 1.0}, {false, true});
      const auto s = gain_ensemble(
          riesz_second_order(2, 1, 0), p, [&](unsigned long long seed) { return partial_holder_field(g, p, seed); }, 4,
          c.seed);
      record("gain_max_over_median", s.max / s.median, 50.0, true);
    }
    {
      const auto r = example2_heat(example2_data(Grid::cube(2, std::numbers::pi, 128), 0.75, c.seed), 0.75);
      record("example2_ut_space_fit", r.ut_space_fit(), 1.4, false);
    }
    {
      OracleOptions oo;
      oo.collocation_points = 32;
      record("oracle_rel_error", ch_denominator_comparison(2.5, 8, oo).max_rel_error, 1e-8, true);
    }
    {
      const Grid g({8.0, std::numbers::pi / 2}, {128, 128});
      const HeatDipoleData d;
      record("heat_trace_rel_l2", relative_l2(heat_boundary_trace(heat_dipole_data(g, d), 1.0),
                                              heat_convolution_oracle(g, 1.0, d)),
             1e-6, true);
    }
    {
      SchauderSetup s;
      s.t_points = 56;
      s.x_points = 16;
      s.depth_points = 16;
      HalfSpaceOptions opt;
      opt.depth_points = s.depth_points;
      const auto h = causal_dipole_data(s.boundary_grid(), c.seed);
      const auto s1 = solve({TraceVariant::laplace_dynamic, 1.0, h}, opt);
      const auto s2 = solve({TraceVariant::flux_dynamic, 1.0, h}, opt);
      record("ch1_trace_residual", s1.trace_residual, 1e-9, true);
      record("ch2_trace_residual", s2.trace_residual, 1e-9, true);
      checks["ch1_interior_norm"] = s1.interior_norm->value;
      checks["ch2_interior_norm"] = s2.interior_norm->value;
    }
    a.report = {{"subcommand", "selftest"}, {"seed", c.seed}, {"checks", checks}};
    a.csv = t.str();
    return a;
  };
  return cmd;
}

std::string valid_subcommands(const std::vector<Command>& cmds) {
  std::string s;
  for (const auto& c : cmds) s += (s.empty() ? "" : ", ") + c.app->get_name();
  return s;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"holderlab: Fourier multipliers, Hoelder gains and half-space traces"};
  app.set_config("--config", "", "key-value config file with [subcommand] sections; flags win");
  app.allow_config_extras(CLI::config_extras_mode::error);
  app.require_subcommand(0, 1);
  Common common;
  std::vector<Command> cmds;
  cmds.push_back(make_decompose(app, common));
  cmds.push_back(make_apply(app, common));
  cmds.push_back(make_gain(app, common));
  cmds.push_back(make_certify(app, common));
  cmds.push_back(make_seminorm(app, common));
  cmds.push_back(make_example1(app, common));
  cmds.push_back(make_example2(app, common));
  cmds.push_back(make_ch(app, common, TraceVariant::laplace_dynamic));
  cmds.push_back(make_ch(app, common, TraceVariant::flux_dynamic));
  cmds.push_back(make_oracle(app, common));
  cmds.push_back(make_selftest(app, common));

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ExtrasError& e) {
    std::cerr << "error: " << e.what() << "\nvalid subcommands: " << valid_subcommands(cmds) << "\n";
    return 2;
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  const Command* chosen = nullptr;
  for (const auto& c : cmds)
    if (c.app->parsed()) chosen = &c;
  if (!chosen) {
    std::cerr << "error: no subcommand given\nvalid subcommands: " << valid_subcommands(cmds) << "\n";
    return 2;
  }
  const std::string name = chosen->app->get_name();
  try {
    if (common.dry_run) {
      json plan = chosen->plan();
      plan["out_dir"] = common.out_dir;
      std::cout << dump_json(plan);
      return 0;
    }
    const Artifacts a = chosen->run();
    write_artifacts(name, a, common.out_dir);
    std::cout << name << ": " << (a.pass ? "pass" : "FAIL") << " (" << (fs::path(common.out_dir) / (name + ".json")).string()
              << ")\n";
    return a.pass ? 0 : 1;
  } catch (const std::invalid_argument& e) {
    std::cerr << name << ": configuration error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << name << ": error: " << e.what() << "\n";
    return 2;
  }
}
