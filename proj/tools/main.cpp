// locosim command-line interface: run scenarios, validate and export
// configuration files, cross-check the reduced dynamics against the engine,
// and render the study figures.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "loco/csvio.hpp"
#include "loco/scenario.hpp"
#include "loco/school.hpp"
#include "loco/svgplot.hpp"

namespace fs = std::filesystem;

namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw loco::ValidationError("cannot open '" + path + "' for reading");
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

loco::Scenario resolve_scenario(const std::string& name, const std::string& seed_path) {
  loco::Scenario sc;
  if (fs::exists(name) && !fs::is_directory(name)) {
    sc = loco::scenario_from_json(read_file(name));
  } else {
    sc = loco::builtin_scenario(name);
  }
  if (!seed_path.empty()) sc = loco::apply_overlay(sc, read_file(seed_path));
  loco::validate_scenario(sc);
  return sc;
}

std::string fmt(double v) {
  char b[32];
  std::snprintf(b, sizeof b, "%.6g", v);
  return b;
}

void print_summary(const loco::Scenario& sc, const loco::RunResult& res) {
  const loco::Trajectory& tr = res.trajectory;
  std::cout << sc.name << ": " << tr.robot_count << " robot"
            << (tr.robot_count > 1 ? "s" : "") << ", " << loco::topology_name(sc.topology)
            << " topology\n";
  std::cout << "  samples " << tr.samples.size() << ", steps accepted "
            << res.steps_accepted << ", rejected " << res.steps_rejected;
  if (res.stopped_early) std::cout << ", stopped early at t = " << fmt(tr.samples.back().t);
  std::cout << "\n";

  double cres = 0.0;
  double pmax = 0.0;
  for (const loco::TrajectorySample& s : tr.samples) {
    cres = std::max(cres, s.c_res);
    pmax = std::max(pmax, s.momentum.norm());
  }
  std::cout << "  max constraint residual " << fmt(cres) << "\n";

  if (sc.topology == loco::Topology::school) {
    std::cout << "  max |total momentum| " << fmt(pmax) << "\n";
    for (int r = 0; r < tr.robot_count; ++r) {
      const loco::DisplacementReport rep = loco::displacement_report(tr, r);
      std::cout << "  robot " << (r + 1) << " net displacement "
                << fmt(rep.net_displacement) << " m\n";
    }
    const Eigen::Vector2d plat = tr.platform_position(tr.samples.back()) -
                                 tr.platform_position(tr.samples.front());
    std::cout << "  platform net displacement (" << fmt(plat[0]) << ", " << fmt(plat[1])
              << ") m\n";
  }
  if (sc.topology == loco::Topology::controlled_platform) {
    double err = 0.0;
    for (std::size_t i = tr.samples.size() / 2; i < tr.samples.size(); ++i) {
      err = std::max(err, std::abs(tr.samples[i].q[3] - tr.samples[i].theta_d));
    }
    std::cout << "  max |theta - theta_d| over the final half " << fmt(err) << " rad\n";
    if (sc.reference.kind == loco::HeadingRefSpec::Kind::waypoints) {
      std::cout << "  targets reached " << res.switch_times.size() << "/"
                << sc.reference.targets.size();
      if (!res.switch_times.empty()) {
        std::cout << " at t =";
        for (double t : res.switch_times) std::cout << " " << fmt(t);
      }
      std::cout << "\n";
    }
  }
}

void write_artifacts(const loco::Scenario& sc, const loco::RunResult& res,
                     const std::string& out_dir, bool csv, bool svg) {
  if (!csv && !svg) return;
  fs::create_directories(out_dir);
  if (csv) {
    const std::string path = out_dir + "/" + sc.name + ".csv";
    loco::write_csv(res.trajectory, path);
    std::cout << "  wrote " << path << "\n";
  }
  if (svg) {
    const std::string path = out_dir + "/" + sc.name + ".svg";
    loco::render_svg(loco::figure_panels(sc, res), path);
    std::cout << "  wrote " << path << "\n";
  }
}

const std::vector<std::string> kFig4Variants = {"fig4_sync", "fig4_mirror", "fig4_plus90",
                                                "fig4_minus90"};

// Overlay of the four variants' robot-1 paths, the shape comparison the
// variants exist for.
loco::PlotPanel fig4_overlay(
    const std::vector<std::pair<std::string, loco::RunResult>>& runs) {
  loco::PlotPanel panel;
  panel.title = "fig4 variants: robot 1 paths";
  panel.xlabel = "x [m]";
  panel.ylabel = "y [m]";
  panel.equal_aspect = true;
  std::string order = "net displacement:";
  for (const auto& [name, res] : runs) {
    const loco::DisplacementReport rep = loco::displacement_report(res.trajectory, 0);
    loco::PlotSeries s;
    s.label = name.substr(5); // strip the common fig4_ prefix
    s.x.reserve(rep.path.size());
    s.y.reserve(rep.path.size());
    for (const Eigen::Vector2d& p : rep.path) {
      s.x.push_back(p[0]);
      s.y.push_back(p[1]);
    }
    panel.series.push_back(std::move(s));
    order += " " + name.substr(5) + " " + fmt(rep.net_displacement);
  }
  panel.notes.push_back(order);
  return panel;
}

int cmd_run(const std::string& name, const std::string& seed, const std::string& out_dir,
            bool csv, bool svg) {
  if (name == "fig4_variants") {
    std::vector<std::pair<std::string, loco::RunResult>> runs;
    for (const std::string& v : kFig4Variants) {
      const loco::Scenario sc = resolve_scenario(v, seed);
      runs.emplace_back(v, loco::run_scenario(sc));
      print_summary(sc, runs.back().second);
      write_artifacts(sc, runs.back().second, out_dir, csv, svg);
    }
    if (svg) {
      fs::create_directories(out_dir);
      const std::string path = out_dir + "/fig4_variants.svg";
      loco::render_svg({fig4_overlay(runs)}, path);
      std::cout << "  wrote " << path << "\n";
    }
    return 0;
  }
  const loco::Scenario sc = resolve_scenario(name, seed);
  const loco::RunResult res = loco::run_scenario(sc);
  print_summary(sc, res);
  write_artifacts(sc, res, out_dir, csv, svg);
  return 0;
}

int cmd_list() {
  std::cout << "built-in scenarios:\n";
  for (const std::string& name : loco::builtin_scenario_names()) {
    const loco::Scenario sc = loco::builtin_scenario(name);
    std::cout << "  " << name << "  -  " << sc.summary << "\n";
  }
  std::cout << "  fig4_variants  -  umbrella: runs all four fig4_* variants\n";
  return 0;
}

int cmd_validate(const std::string& config, const std::string& emit_dir) {
  if (!emit_dir.empty()) {
    fs::create_directories(emit_dir);
    for (const std::string& name : loco::builtin_scenario_names()) {
      const std::string path = emit_dir + "/" + name + ".json";
      std::ofstream out(path);
      if (!out) throw loco::ValidationError("cannot open '" + path + "' for writing");
      out << loco::scenario_to_json(loco::builtin_scenario(name));
      std::cout << "wrote " << path << "\n";
    }
  }
  if (!config.empty()) {
    const loco::Scenario sc = loco::scenario_from_json(read_file(config));
    loco::validate_scenario(sc);
    std::cout << "OK: " << (sc.name.empty() ? config : sc.name) << " ("
              << sc.robots.size() << " robot" << (sc.robots.size() > 1 ? "s" : "") << ", "
              << loco::topology_name(sc.topology) << ")\n";
  } else if (emit_dir.empty()) {
    throw loco::ValidationError("validate needs a config file or --emit-defaults");
  }
  return 0;
}

int cmd_compare(double delta) {
  // The cross-check pairing: single robot, stationary platform, a gait that
  // keeps the joint clear of the straightened singularity.
  loco::RobotParams par;
  par.head = {2.0, 2.0, 2.0};
  par.tail = {1.0, 1.0, 0.25};
  const loco::GaitSignal gait{0.3, 1.0, 0.0, M_PI / 2.0};
  const loco::CompareReport rep = loco::compare_reduced_engine(par, gait, 10.0, delta);
  std::cout << "reduced vs engine, 10 s, gait amplitude 0.3 about bias pi/2:\n";
  std::cout << "  max pose gap        " << fmt(rep.max_pose_gap) << "  (" << rep.samples
            << " samples)\n";
  std::cout << "  max momentum gap    " << fmt(rep.max_momentum_rel)
            << " relative to the peak  (" << rep.momentum_samples << " samples with |sin alpha| > "
            << fmt(delta) << ")\n";
  return 0;
}

int cmd_figures(const std::string& out_dir) {
  fs::create_directories(out_dir);
  for (const std::string& name :
       {std::string("fig3_school"), std::string("fig5_spring"), std::string("fig6_circle"),
        std::string("fig7_snake"), std::string("fig8_waypoints")}) {
    const loco::Scenario sc = loco::builtin_scenario(name);
    const loco::RunResult res = loco::run_scenario(sc);
    print_summary(sc, res);
    write_artifacts(sc, res, out_dir, true, true);
  }
  std::vector<std::pair<std::string, loco::RunResult>> runs;
  for (const std::string& v : kFig4Variants) {
    const loco::Scenario sc = loco::builtin_scenario(v);
    runs.emplace_back(v, loco::run_scenario(sc));
    print_summary(sc, runs.back().second);
    write_artifacts(sc, runs.back().second, out_dir, true, true);
  }
  const std::string path = out_dir + "/fig4_variants.svg";
  loco::render_svg({fig4_overlay(runs)}, path);
  std::cout << "  wrote " << path << "\n";
  return 0;
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"simulation and heading control of two-link wheeled robots on a"
               " shared platform"};
  app.require_subcommand(1);

  std::string run_name;
  std::string out_dir = "out";
  std::string seed;
  bool csv = false;
  bool svg = false;
  CLI::App* run_cmd = app.add_subcommand("run", "run a scenario and print a summary");
  run_cmd->add_option("scenario", run_name,
                      "built-in scenario name or path to a scenario JSON file")
      ->required();
  run_cmd->add_option("--out", out_dir, "output directory for artifacts");
  run_cmd->add_flag("--csv", csv, "write <out>/<name>.csv");
  run_cmd->add_flag("--svg", svg, "write <out>/<name>.svg");
  run_cmd->add_option("--seed-config", seed, "JSON overlay merged into the scenario");

  CLI::App* list_cmd = app.add_subcommand("list", "list built-in scenarios");

  std::string config;
  std::string emit_dir;
  CLI::App* val_cmd = app.add_subcommand("validate", "validate a scenario JSON file");
  val_cmd->add_option("config", config, "scenario JSON file");
  val_cmd->add_option("--emit-defaults", emit_dir,
                      "write every built-in scenario as JSON into this directory");

  double delta = 0.05;
  CLI::App* cmp_cmd =
      app.add_subcommand("compare", "integrate the reduced and full models side by side");
  cmp_cmd->add_option("--delta", delta,
                      "skip momentum comparison where |sin alpha| <= delta");

  std::string fig_dir = "out";
  CLI::App* fig_cmd =
      app.add_subcommand("figures", "run the study scenarios, write CSV and SVG artifacts");
  fig_cmd->add_option("--out", fig_dir, "output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1; // usage problems are validation failures
  }

  try {
    if (run_cmd->parsed()) return cmd_run(run_name, seed, out_dir, csv, svg);
    if (list_cmd->parsed()) return cmd_list();
    if (val_cmd->parsed()) return cmd_validate(config, emit_dir);
    if (cmp_cmd->parsed()) return cmd_compare(delta);
    if (fig_cmd->parsed()) return cmd_figures(fig_dir);
  } catch (const loco::ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const loco::NumericalError& e) {
    std::cerr << "numerical error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
