#include "maggrab/simharness.hpp"

#include "maggrab/errors.hpp"
#include "maggrab/textio.hpp"

#include <cmath>
#include <ostream>

namespace maggrab {

using nlohmann::json;

std::string_view to_string(RunOutcome o)
{
    switch (o) {
    case RunOutcome::Grabbed: return "Grabbed";
    case RunOutcome::IterationLimit: return "IterationLimit";
    case RunOutcome::Failed: return "Failed";
    }
    return "Failed";
}

std::size_t TrajectoryLog::rotate_cycles() const
{
    std::size_t n = 0;
    for (const auto& c : cycles) {
        n += c.phase == Phase::RotateTool ? 1 : 0;
    }
    return n;
}

Line3 true_conductor_in_base(const ScenarioConfig& cfg)
{
    if (cfg.scene.conductors.empty()) {
        throw InvalidArgument("scene has no conductor");
    }
    return cfg.scene.conductors.front().line.transformed(cfg.robot_base.inverse());
}

std::pair<SensorPose, SensorPose> sensor_poses(const ScenarioConfig& cfg, const RigidTransform& ee_in_base)
{
    const RigidTransform ee_in_world = cfg.robot_base * ee_in_base;
    return {SensorPose{ee_in_world * cfg.mount1}, SensorPose{ee_in_world * cfg.mount2}};
}

namespace {

std::size_t windows_per_dwell(const ScenarioConfig& cfg)
{
    const double n = std::ceil(cfg.procedure.dwell_k / cfg.sampling.window_duration() - 1e-9);
    return n < 1.0 ? 1 : static_cast<std::size_t>(n);
}

std::uint64_t noise_stream(std::size_t cycle, std::size_t window, int sensor)
{
    return (static_cast<std::uint64_t>(cycle) << 32) ^ (static_cast<std::uint64_t>(window) << 1) ^
           static_cast<std::uint64_t>(sensor);
}

// Collects one dwell's worth of windows at `ee` and fuses the non-degenerate
// localizations (robot-base frame) into one result.
LocalizationResult localize_at(const ScenarioConfig& cfg, const FieldScene& scene, const RigidTransform& ee,
                               double t_start, CycleRecord& rec)
{
    const auto [sp1, sp2] = sensor_poses(cfg, ee);
    const SensorRig rig = cfg.rig();
    const RigidTransform m1_in_base = ee * cfg.mount1;
    const auto& smp = cfg.sampling;

    std::vector<ConductorEstimate> found;
    double last_angle = 0.0;
    for (std::size_t w = 0; w < rec.windows; ++w) {
        const double t0 = t_start + static_cast<double>(w) * smp.window_duration();
        SampleWindow win1 = sample_sensor(scene, sp1, smp.rate, smp.window_length, t0, noise_stream(rec.cycle, w, 0));
        SampleWindow win2 = sample_sensor(scene, sp2, smp.rate, smp.window_length, t0, noise_stream(rec.cycle, w, 1));
        const FieldVectorEstimate b1 = extract_field_vector(win1, smp.target_frequency, smp.amplitude_floor);
        const FieldVectorEstimate b2 = extract_field_vector(win2, smp.target_frequency, smp.amplitude_floor);
        if (w == 0) {
            rec.b1 = b1;
            rec.b2 = b2;
        }
        if (cfg.log_windows) {
            rec.raw_m1.push_back(std::move(win1));
            rec.raw_m2.push_back(std::move(win2));
        }
        const LocalizationResult r = localize_conductor(b1, b2, rig, cfg.procedure.alpha_min);
        if (const auto* est = std::get_if<ConductorEstimate>(&r)) {
            ConductorEstimate in_base = *est;
            in_base.line = est->line.transformed(m1_in_base);
            found.push_back(in_base);
        } else {
            last_angle = std::get<DegenerateParallel>(r).angle_between_fields;
        }
    }

    if (found.empty()) {
        rec.degenerate = true;
        rec.angle_between_fields = last_angle;
        return DegenerateParallel{last_angle};
    }
    const ConductorEstimate fused = estimate_fusion(found);
    rec.estimate = fused;
    rec.angle_between_fields = fused.angle_between_fields;
    return fused;
}

} // namespace

TrajectoryLog run_closed_loop(const ScenarioConfig& cfg, std::size_t start_index)
{
    cfg.validate();
    if (start_index >= cfg.start_poses.size()) {
        throw InvalidArgument("start index out of range");
    }

    TrajectoryLog log;
    log.start_index = start_index;
    log.start_pose = cfg.start_poses[start_index];
    log.true_grab_point = select_grab_point(true_conductor_in_base(cfg), {0.0, 0.0, 0.0});

    FieldScene scene = cfg.scene;
    scene.rng_seed = mix_seed(cfg.seed, start_index);

    const std::size_t windows = windows_per_dwell(cfg);
    const double dwell = static_cast<double>(windows) * cfg.sampling.window_duration();
    const ProcedureParams& params = cfg.procedure;

    RigidTransform ee = log.start_pose;
    double t = 0.0;

    auto step = [&](const ProcedureState& s, Observation obs) {
        ++log.steps;
        obs.ee_pose = ee;
        return step_procedure(s, obs, params);
    };

    ProcedureState state = step({}, {.start = true}).state;
    try {
        while (true) {
            CycleRecord rec;
            rec.cycle = log.cycles.size();
            rec.time = t;
            rec.ee_pose = ee;
            rec.windows = windows;
            const LocalizationResult result = localize_at(cfg, scene, ee, t, rec);
            t += dwell;

            if (state.phase == Phase::AwaitCommand) {
                state = step(state, {.dwell_elapsed = dwell}).state;
            }
            StepResult decided = step(state, {.estimate = result});
            state = decided.state;
            rec.phase = state.phase;
            rec.command = decided.command;
            log.cycles.push_back(std::move(rec));

            if (!decided.command) {
                log.outcome = RunOutcome::Failed;
                log.message = "procedure produced no command";
                break;
            }
            ee = decided.command->target;
            state = step(state, {}).state;
            if (state.phase == Phase::Grabbed) {
                log.outcome = RunOutcome::Grabbed;
                break;
            }
        }
    } catch (const IterationLimit& e) {
        log.outcome = RunOutcome::IterationLimit;
        log.message = e.what();
    } catch (const Error& e) {
        log.outcome = RunOutcome::Failed;
        log.message = e.what();
    }
    log.final_pose = ee;
    return log;
}

ConductorEstimate estimate_fusion(std::span<const ConductorEstimate> estimates)
{
    if (estimates.empty()) {
        throw InvalidArgument("nothing to fuse");
    }
    if (estimates.size() == 1) {
        return estimates.front();
    }
    const Vec3 reference = estimates.front().line.direction;
    Vec3 dir_sum;
    Vec3 point_sum;
    double angle_sum = 0.0;
    double consistency_sum = 0.0;
    for (const auto& e : estimates) {
        const Vec3& d = e.line.direction;
        dir_sum += dot(d, reference) < 0.0 ? -d : d;
        point_sum += e.line.canonical().point;
        angle_sum += e.angle_between_fields;
        consistency_sum += e.magnitude_consistency;
    }
    const double n = static_cast<double>(estimates.size());
    return {{point_sum / n, UnitVec3::normalize(dir_sum)}, angle_sum / n, consistency_sum / n};
}

std::vector<LocalizationResult> replay_log(const SampleWindow& m1_stream, const SampleWindow& m2_stream,
                                           const ScenarioConfig& cfg)
{
    if (m1_stream.size() != m2_stream.size()) {
        throw LengthMismatch("sensor streams have " + std::to_string(m1_stream.size()) + " and " +
                             std::to_string(m2_stream.size()) + " samples");
    }
    const auto& smp = cfg.sampling;
    const auto w1 = split_windows(m1_stream, smp.window_length);
    const auto w2 = split_windows(m2_stream, smp.window_length);
    if (w1.empty()) {
        throw SchemaError("recording is shorter than one window");
    }
    const SensorRig rig = cfg.rig();
    std::vector<LocalizationResult> out;
    out.reserve(w1.size());
    for (std::size_t i = 0; i < w1.size(); ++i) {
        const auto b1 = extract_field_vector(w1[i], smp.target_frequency, smp.amplitude_floor);
        const auto b2 = extract_field_vector(w2[i], smp.target_frequency, smp.amplitude_floor);
        out.push_back(localize_conductor(b1, b2, rig, cfg.procedure.alpha_min));
    }
    return out;
}

std::vector<LocalizationResult> replay_log(std::istream& m1_csv, std::istream& m2_csv, const ScenarioConfig& cfg)
{
    const SampleWindow s1 = read_window_csv(m1_csv, cfg.sampling.rate);
    const SampleWindow s2 = read_window_csv(m2_csv, cfg.sampling.rate);
    return replay_log(s1, s2, cfg);
}

RunSummary summarize(const TrajectoryLog& log)
{
    return {log.start_index,     log.outcome,     log.steps, log.stopping_points(), log.rotate_cycles(),
            log.final_pose.translation, log.true_grab_point};
}

RunReport compute_report(std::span<const RunSummary> runs)
{
    RunReport report;
    report.runs.assign(runs.begin(), runs.end());
    report.deviations.assign(runs.size(), std::nullopt);

    // Offsets from the first grabbed run keep identical finals at exactly
    // zero deviation.
    std::optional<Vec3> anchor;
    Vec3 offset_sum;
    for (const auto& r : runs) {
        if (r.outcome == RunOutcome::Grabbed) {
            if (!anchor) {
                anchor = r.final_position;
            }
            offset_sum += r.final_position - *anchor;
            ++report.grabbed;
            report.max_grab_error = std::max(report.max_grab_error, distance(r.final_position, r.true_grab_point));
        }
    }
    if (report.grabbed == 0) {
        return report;
    }
    const double n = static_cast<double>(report.grabbed);
    const Vec3 mean = *anchor + offset_sum / n;
    report.mean_final = mean;

    double dev_sum = 0.0;
    for (std::size_t i = 0; i < runs.size(); ++i) {
        if (runs[i].outcome != RunOutcome::Grabbed) {
            continue;
        }
        const double dev = distance(runs[i].final_position, mean);
        report.deviations[i] = dev;
        dev_sum += dev;
        report.deviation_max = std::max(report.deviation_max, dev);
    }
    report.deviation_mean = dev_sum / n;
    double var = 0.0;
    for (const auto& d : report.deviations) {
        if (d) {
            var += (*d - report.deviation_mean) * (*d - report.deviation_mean);
        }
    }
    report.deviation_std = std::sqrt(var / n);
    return report;
}

RunReport compute_report(std::span<const TrajectoryLog> logs)
{
    std::vector<RunSummary> runs;
    runs.reserve(logs.size());
    for (const auto& log : logs) {
        runs.push_back(summarize(log));
    }
    return compute_report(runs);
}

// ---------------------------------------------------------------------------
// Output

namespace {

void put(std::ostream& out, double v)
{
    out << ',' << textio::format_double(v);
}

void put(std::ostream& out, const Vec3& v)
{
    put(out, v.x);
    put(out, v.y);
    put(out, v.z);
}

void put(std::ostream& out, const RotationMatrix& r)
{
    for (const auto& row : r.rows()) {
        for (double v : row) {
            put(out, v);
        }
    }
}

void put_empty(std::ostream& out, int n)
{
    for (int i = 0; i < n; ++i) {
        out << ',';
    }
}

std::string matrix_header(const std::string& prefix)
{
    std::string h;
    for (int r = 0; r < 3; ++r) {
        for (int c = 0; c < 3; ++c) {
            h += "," + prefix + "_r" + std::to_string(r) + std::to_string(c);
        }
    }
    return h;
}

} // namespace

void write_trajectory_csv(std::ostream& out, const TrajectoryLog& log)
{
    out << "cycle,time,phase,ee_x,ee_y,ee_z" << matrix_header("ee")
        << ",windows,b1_x,b1_y,b1_z,b2_x,b2_y,b2_z,degenerate,angle_fields,"
           "line_px,line_py,line_pz,line_dx,line_dy,line_dz,consistency,cmd,cmd_x,cmd_y,cmd_z"
        << matrix_header("cmd") << '\n';
    for (const auto& c : log.cycles) {
        out << c.cycle;
        put(out, c.time);
        out << ',' << to_string(c.phase);
        put(out, c.ee_pose.translation);
        put(out, c.ee_pose.rotation);
        out << ',' << c.windows;
        if (c.b1) { put(out, c.b1->vector); } else { put_empty(out, 3); }
        if (c.b2) { put(out, c.b2->vector); } else { put_empty(out, 3); }
        out << ',' << (c.degenerate ? 1 : 0);
        put(out, c.angle_between_fields);
        if (c.estimate) {
            const Line3 line = c.estimate->line.canonical();
            put(out, line.point);
            put(out, line.direction.vec());
            put(out, c.estimate->magnitude_consistency);
        } else {
            put_empty(out, 7);
        }
        if (c.command) {
            out << ',' << to_string(c.command->kind);
            put(out, c.command->target.translation);
            put(out, c.command->target.rotation);
        } else {
            put_empty(out, 13);
        }
        out << '\n';
    }
}

json to_json(const RunSummary& s)
{
    return {
        {"start_index", s.start_index},
        {"outcome", std::string(to_string(s.outcome))},
        {"steps", s.steps},
        {"stopping_points", s.stopping_points},
        {"rotate_cycles", s.rotate_cycles},
        {"final_position", to_json(s.final_position)},
        {"true_grab_point", to_json(s.true_grab_point)},
        {"grab_error", distance(s.final_position, s.true_grab_point)},
    };
}

json to_json(const TrajectoryLog& log)
{
    json j = to_json(summarize(log));
    j["message"] = log.message;
    j["start_pose"] = to_json(log.start_pose);
    j["final_pose"] = to_json(log.final_pose);
    return j;
}

RunSummary run_summary_from_json(const json& j)
{
    try {
        RunSummary s;
        s.start_index = j.at("start_index").get<std::size_t>();
        const auto outcome = j.at("outcome").get<std::string>();
        if (outcome == "Grabbed") {
            s.outcome = RunOutcome::Grabbed;
        } else if (outcome == "IterationLimit") {
            s.outcome = RunOutcome::IterationLimit;
        } else if (outcome == "Failed") {
            s.outcome = RunOutcome::Failed;
        } else {
            throw SchemaError("run summary: unknown outcome '" + outcome + "'");
        }
        s.steps = j.at("steps").get<std::size_t>();
        s.stopping_points = j.at("stopping_points").get<std::size_t>();
        s.rotate_cycles = j.value("rotate_cycles", std::size_t{0});
        s.final_position = vec3_from_json(j.at("final_position"), "final_position");
        s.true_grab_point = vec3_from_json(j.at("true_grab_point"), "true_grab_point");
        return s;
    } catch (const json::exception& e) {
        throw SchemaError(std::string("run summary: ") + e.what());
    }
}

json to_json(const RunReport& r)
{
    json runs = json::array();
    for (std::size_t i = 0; i < r.runs.size(); ++i) {
        json run = to_json(r.runs[i]);
        run["deviation"] = r.deviations[i] ? json(*r.deviations[i]) : json(nullptr);
        runs.push_back(run);
    }
    return {
        {"runs", runs},
        {"run_count", r.runs.size()},
        {"grabbed", r.grabbed},
        {"mean_final_position", r.mean_final ? to_json(*r.mean_final) : json(nullptr)},
        {"deviation_mean", r.deviation_mean},
        {"deviation_std", r.deviation_std},
        {"deviation_max", r.deviation_max},
        {"max_grab_error", r.max_grab_error},
    };
}

} // namespace maggrab
