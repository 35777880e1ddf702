#include "maggrab/cli.hpp"

#include "maggrab/errors.hpp"
#include "maggrab/simharness.hpp"
#include "maggrab/textio.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <optional>
#include <ostream>
#include <sstream>

namespace maggrab::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Invocation {
    std::string config;
    std::string out_dir;
    std::string in_dir;
    std::optional<std::uint64_t> seed;
    std::size_t pose = 0;
    std::size_t windows = 1;
    bool quiet = false;
    bool verbose = false;
};

// Runtime failure that maps to exit status 1.
class RunFailure : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class Context {
public:
    Context(const Invocation& inv, std::ostream& out, std::ostream& err) : inv_(inv), out_(out), err_(err) {}

    void info(const std::string& msg) const
    {
        if (!inv_.quiet) {
            out_ << msg << '\n';
        }
    }
    void debug(const std::string& msg) const
    {
        if (inv_.verbose) {
            err_ << msg << '\n';
        }
    }
    void warn(const std::string& msg) const
    {
        if (!inv_.quiet) {
            err_ << "warning: " << msg << '\n';
        }
    }

    ScenarioConfig load_config() const
    {
        ScenarioConfig cfg = load_scenario(inv_.config);
        if (inv_.seed) {
            cfg.seed = *inv_.seed;
        }
        for (const auto& w : cfg.warnings()) {
            warn(w);
        }
        return cfg;
    }

    fs::path out_dir() const
    {
        fs::create_directories(inv_.out_dir);
        return inv_.out_dir;
    }

    const Invocation& inv() const { return inv_; }

private:
    const Invocation& inv_;
    std::ostream& out_;
    std::ostream& err_;
};

void write_text(const fs::path& path, const std::string& text)
{
    std::ofstream f(path, std::ios::binary);
    if (!f) {
        throw std::runtime_error("cannot write '" + path.string() + "'");
    }
    f << text;
}

void write_json(const fs::path& path, const json& j)
{
    write_text(path, j.dump(2) + "\n");
}

std::string indexed(const std::string& stem, std::size_t i, const std::string& ext)
{
    char buf[16];
    std::snprintf(buf, sizeof(buf), "%02zu", i);
    return stem + "_" + buf + ext;
}

json scene_truth(const ScenarioConfig& cfg)
{
    json lines = json::array();
    for (const auto& c : cfg.scene.conductors) {
        lines.push_back({{"world", to_json(c.line.canonical())},
                         {"base", to_json(c.line.transformed(cfg.robot_base.inverse()).canonical())},
                         {"current_rms", c.current_rms},
                         {"frequency", c.frequency},
                         {"phase", c.phase}});
    }
    return lines;
}

json estimate_json(const LocalizationResult& r, const RigidTransform* m1_in_base)
{
    if (const auto* d = std::get_if<DegenerateParallel>(&r)) {
        return {{"degenerate", true}, {"angle_between_fields", d->angle_between_fields}};
    }
    const auto& est = std::get<ConductorEstimate>(r);
    json j = {{"degenerate", false},
              {"angle_between_fields", est.angle_between_fields},
              {"magnitude_consistency", est.magnitude_consistency},
              {"line_m1", to_json(est.line.canonical())}};
    if (m1_in_base != nullptr) {
        j["line_base"] = to_json(est.line.transformed(*m1_in_base).canonical());
    }
    return j;
}

// --- subcommands -----------------------------------------------------------

int cmd_simulate(const Context& ctx)
{
    const ScenarioConfig cfg = ctx.load_config();
    const auto& inv = ctx.inv();
    if (inv.pose >= cfg.start_poses.size()) {
        throw SchemaError("--pose " + std::to_string(inv.pose) + " out of range");
    }
    if (inv.windows == 0) {
        throw SchemaError("--windows must be >= 1");
    }
    FieldScene scene = cfg.scene;
    scene.rng_seed = mix_seed(cfg.seed, inv.pose);
    const RigidTransform& ee = cfg.start_poses[inv.pose];
    const auto [sp1, sp2] = sensor_poses(cfg, ee);
    const std::size_t n = cfg.sampling.window_length * inv.windows;
    const SampleWindow w1 = sample_sensor(scene, sp1, cfg.sampling.rate, n, 0.0, 0);
    const SampleWindow w2 = sample_sensor(scene, sp2, cfg.sampling.rate, n, 0.0, 1);

    const fs::path dir = ctx.out_dir();
    std::ostringstream s1;
    std::ostringstream s2;
    write_window_csv(s1, w1);
    write_window_csv(s2, w2);
    write_text(dir / "sensor1.csv", s1.str());
    write_text(dir / "sensor2.csv", s2.str());

    const SensorRig rig = cfg.rig();
    const RigidTransform m1_in_base = ee * cfg.mount1;
    json truth = {
        {"seed", cfg.seed},
        {"pose_index", inv.pose},
        {"samples", n},
        {"rate", cfg.sampling.rate},
        {"ee_pose_base", to_json(ee)},
        {"sensor1_pose_world", to_json(sp1.pose)},
        {"sensor2_pose_world", to_json(sp2.pose)},
        {"rig", {{"m2_in_m1", to_json(rig.m2_in_m1())}}},
        {"conductors", scene_truth(cfg)},
    };
    if (!cfg.scene.conductors.empty()) {
        truth["conductor_m1"] =
            to_json(cfg.scene.conductors.front().line.transformed((cfg.robot_base * m1_in_base).inverse()).canonical());
    }
    write_json(dir / "ground_truth.json", truth);
    ctx.info("wrote " + std::to_string(n) + " samples per sensor to " + dir.string());
    return kOk;
}

int cmd_localize(const Context& ctx)
{
    const ScenarioConfig cfg = ctx.load_config();
    const SensorRig rig = cfg.rig();
    const Line3 truth = true_conductor_in_base(cfg);
    const auto& smp = cfg.sampling;

    json poses = json::array();
    bool any_failed = false;
    for (std::size_t i = 0; i < cfg.start_poses.size(); ++i) {
        const RigidTransform& ee = cfg.start_poses[i];
        FieldScene scene = cfg.scene;
        scene.rng_seed = mix_seed(cfg.seed, i);
        const auto [sp1, sp2] = sensor_poses(cfg, ee);
        const RigidTransform m1_in_base = ee * cfg.mount1;
        json entry = {{"pose_index", i}};
        try {
            const auto w1 = sample_sensor(scene, sp1, smp.rate, smp.window_length, 0.0, 0);
            const auto w2 = sample_sensor(scene, sp2, smp.rate, smp.window_length, 0.0, 1);
            const auto b1 = extract_field_vector(w1, smp.target_frequency, smp.amplitude_floor);
            const auto b2 = extract_field_vector(w2, smp.target_frequency, smp.amplitude_floor);
            const auto result = localize_conductor(b1, b2, rig, cfg.procedure.alpha_min);
            entry.update(estimate_json(result, &m1_in_base));
            entry["b1"] = to_json(b1.vector);
            entry["b2"] = to_json(b2.vector);
            if (const auto* est = std::get_if<ConductorEstimate>(&result)) {
                const Line3 in_base = est->line.transformed(m1_in_base);
                const double dir_err = std::asin(std::min(1.0, norm(cross(in_base.direction, truth.direction))));
                entry["direction_error_rad"] = dir_err;
                entry["point_error_m"] = distance_to_line(truth, in_base.point);
                entry["current_rms_a"] = estimate_current(*est, b1, {0.0, 0.0, 0.0}).rms;
            }
        } catch (const Error& e) {
            entry["error"] = e.what();
            any_failed = true;
        }
        poses.push_back(entry);
    }
    const fs::path dir = ctx.out_dir();
    write_json(dir / "localize.json", {{"seed", cfg.seed}, {"true_line_base", to_json(truth.canonical())}, {"poses", poses}});
    ctx.info("localized " + std::to_string(cfg.start_poses.size()) + " poses into " + (dir / "localize.json").string());
    return any_failed ? kRuntimeFailure : kOk;
}

int cmd_grab(const Context& ctx)
{
    const ScenarioConfig cfg = ctx.load_config();
    const fs::path dir = ctx.out_dir();

    std::vector<TrajectoryLog> logs;
    logs.reserve(cfg.start_poses.size());
    for (std::size_t i = 0; i < cfg.start_poses.size(); ++i) {
        TrajectoryLog log = run_closed_loop(cfg, i);
        std::ostringstream csv;
        write_trajectory_csv(csv, log);
        write_text(dir / indexed("run", i, ".csv"), csv.str());
        write_json(dir / indexed("run", i, ".json"), to_json(log));
        if (cfg.log_windows) {
            for (const auto& c : log.cycles) {
                for (std::size_t w = 0; w < c.raw_m1.size(); ++w) {
                    std::ostringstream a;
                    std::ostringstream b;
                    write_window_csv(a, c.raw_m1[w]);
                    write_window_csv(b, c.raw_m2[w]);
                    const std::string stem = indexed("run", i, "") + indexed("_cycle", c.cycle, "") + indexed("_w", w, "");
                    write_text(dir / (stem + "_m1.csv"), a.str());
                    write_text(dir / (stem + "_m2.csv"), b.str());
                }
            }
        }
        ctx.debug("run " + std::to_string(i) + ": " + std::string(to_string(log.outcome)) + ", " +
                  std::to_string(log.stopping_points()) + " stopping points");
        logs.push_back(std::move(log));
    }

    const RunReport report = compute_report(logs);
    write_json(dir / "report.json", to_json(report));
    ctx.info("grabbed " + std::to_string(report.grabbed) + "/" + std::to_string(logs.size()) +
             " runs; deviation std " + textio::format_double(report.deviation_std) + " m");
    return report.grabbed == logs.size() ? kOk : kRuntimeFailure;
}

int cmd_replay(const Context& ctx)
{
    const ScenarioConfig cfg = ctx.load_config();
    const fs::path in = ctx.inv().in_dir;
    std::ifstream f1(in / "sensor1.csv");
    std::ifstream f2(in / "sensor2.csv");
    if (!f1 || !f2) {
        throw SchemaError("replay input needs sensor1.csv and sensor2.csv in '" + in.string() + "'");
    }
    const auto results = replay_log(f1, f2, cfg);

    std::ostringstream csv;
    csv << "window,degenerate,angle_fields,line_px,line_py,line_pz,line_dx,line_dy,line_dz,consistency\n";
    for (std::size_t i = 0; i < results.size(); ++i) {
        csv << i;
        if (const auto* est = std::get_if<ConductorEstimate>(&results[i])) {
            const Line3 l = est->line.canonical();
            csv << ",0," << textio::format_double(est->angle_between_fields);
            for (double v : {l.point.x, l.point.y, l.point.z, l.direction.x(), l.direction.y(), l.direction.z(),
                             est->magnitude_consistency}) {
                csv << ',' << textio::format_double(v);
            }
        } else {
            csv << ",1," << textio::format_double(std::get<DegenerateParallel>(results[i]).angle_between_fields)
                << ",,,,,,,";
        }
        csv << '\n';
    }
    const fs::path dir = ctx.out_dir();
    write_text(dir / "estimates.csv", csv.str());
    ctx.info("replayed " + std::to_string(results.size()) + " windows");
    return kOk;
}

int cmd_report(const Context& ctx)
{
    const fs::path in = ctx.inv().in_dir;
    if (!fs::is_directory(in)) {
        throw SchemaError("report input directory '" + in.string() + "' does not exist");
    }
    std::vector<fs::path> files;
    for (const auto& e : fs::directory_iterator(in)) {
        const std::string name = e.path().filename().string();
        if (e.is_regular_file() && name.rfind("run_", 0) == 0 && e.path().extension() == ".json") {
            files.push_back(e.path());
        }
    }
    std::sort(files.begin(), files.end());
    if (files.empty()) {
        throw SchemaError("no run_*.json summaries in '" + in.string() + "'");
    }
    std::vector<RunSummary> runs;
    for (const auto& p : files) {
        std::ifstream f(p);
        try {
            runs.push_back(run_summary_from_json(json::parse(f)));
        } catch (const json::parse_error& e) {
            throw SchemaError(p.string() + ": " + e.what());
        }
    }
    const RunReport report = compute_report(runs);
    const fs::path dir = ctx.out_dir();
    write_json(dir / "report.json", to_json(report));
    ctx.info("report over " + std::to_string(runs.size()) + " runs written to " + (dir / "report.json").string());
    return report.grabbed == runs.size() ? kOk : kRuntimeFailure;
}

} // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err)
{
    CLI::App app{"Localize and grab a straight AC conductor from two magnetometers (simulation)", "maggrab"};
    app.require_subcommand(1);
    Invocation inv;

    auto add_common = [&](CLI::App* sub, bool needs_config) {
        auto* c = sub->add_option("--config", inv.config, "Scenario JSON");
        if (needs_config) {
            c->required();
        }
        sub->add_option("--out", inv.out_dir, "Output directory")->required();
        sub->add_option("--seed", inv.seed, "Override the config seed");
        sub->add_flag("--quiet", inv.quiet, "Only report errors");
        sub->add_flag("--verbose", inv.verbose, "Per-run diagnostics on stderr");
    };

    auto* simulate = app.add_subcommand("simulate", "Write sensor sample CSVs and the true conductor line");
    add_common(simulate, true);
    simulate->add_option("--pose", inv.pose, "Start pose index to sample at");
    simulate->add_option("--windows", inv.windows, "Number of consecutive windows to record");

    auto* localize = app.add_subcommand("localize", "Localize the conductor once from every start pose");
    add_common(localize, true);

    auto* grab = app.add_subcommand("grab", "Closed-loop grabbing from every start pose");
    add_common(grab, true);

    auto* replay = app.add_subcommand("replay", "Localize from recorded sensor1.csv / sensor2.csv");
    add_common(replay, true);
    replay->add_option("--in", inv.in_dir, "Directory holding sensor1.csv and sensor2.csv")->required();

    auto* report = app.add_subcommand("report", "Aggregate run_*.json summaries into report.json");
    add_common(report, false);
    report->add_option("--in", inv.in_dir, "Directory holding run_*.json")->required();

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kOk;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << '\n';
        return kUsageError;
    }

    const Context ctx(inv, out, err);
    try {
        if (simulate->parsed()) return cmd_simulate(ctx);
        if (localize->parsed()) return cmd_localize(ctx);
        if (grab->parsed()) return cmd_grab(ctx);
        if (replay->parsed()) return cmd_replay(ctx);
        if (report->parsed()) return cmd_report(ctx);
    } catch (const SchemaError& e) {
        err << "error: " << e.what() << '\n';
        return kUsageError;
    } catch (const LengthMismatch& e) {
        err << "error: " << e.what() << '\n';
        return kUsageError;
    } catch (const InvalidArgument& e) {
        err << "error: " << e.what() << '\n';
        return kUsageError;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kRuntimeFailure;
    }
    return kUsageError;
}

} // namespace maggrab::cli
