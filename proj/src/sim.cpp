#include "dsoar/sim.hpp"

#include <algorithm>
#include <cmath>
#include <json.hpp>

#include "dsoar/rigid_body.hpp"
#include "dsoar/rng.hpp"

namespace dsoar {

namespace {

Eigen::Vector3d normal3(Rng &rng) { return {rng.normal(), rng.normal(), rng.normal()}; }

Eigen::Quaterniond perturb_attitude(const Eigen::Quaterniond &q, const Eigen::Vector3d &angles) {
    const double n = angles.norm();
    if (n < 1e-12) return q;
    return (q * Eigen::Quaterniond(Eigen::AngleAxisd(n, angles / n))).normalized();
}

/// Trim thrust for level flight at the given airspeed (drag at trim lift).
double trim_thrust(const AircraftParams &p, double airspeed) {
    const double q_bar_area = 0.5 * p.rho * airspeed * airspeed * p.wing_area;
    const double cl = p.weight() / std::max(q_bar_area, 1e-6);
    const double alpha = (cl - p.cl0) / p.cl1;
    const auto cc = lift_drag_coeffs(alpha, p);
    return q_bar_area * cc.cd;
}

}  // namespace

SensorNoise SensorNoise::from_config(Config &cfg, const std::string &sec) {
    SensorNoise n;
    n.accel = cfg.get_or(sec + ".accel_mps2", n.accel);
    n.airspeed = cfg.get_or(sec + ".airspeed_mps", n.airspeed);
    n.position = cfg.get_or(sec + ".position_m", n.position);
    n.velocity = cfg.get_or(sec + ".velocity_mps", n.velocity);
    n.attitude = cfg.get_or(sec + ".attitude_rad", n.attitude);
    n.gyro = cfg.get_or(sec + ".gyro_rps", n.gyro);
    return n;
}

GustConfig GustConfig::from_config(Config &cfg, const std::string &sec) {
    GustConfig g;
    g.sigma = cfg.get_or(sec + ".sigma_mps", g.sigma);
    g.tau_corr = cfg.get_or(sec + ".tau_corr_s", g.tau_corr);
    return g;
}

ScenarioConfig ScenarioConfig::from_config(Config &cfg) {
    ScenarioConfig sc;
    sc.nominal_wind = WindFieldParams::from_config(cfg, "wind");
    sc.true_wind = sc.nominal_wind;
    sc.duration = cfg.get_or("sim.duration_s", sc.duration);
    sc.plant_dt = cfg.get_or("sim.plant_dt_s", sc.plant_dt);
    sc.outer_decimation = static_cast<int>(
        cfg.get_or("sim.outer_decimation", static_cast<std::int64_t>(sc.outer_decimation)));
    sc.noise = SensorNoise::from_config(cfg);
    sc.gust = GustConfig::from_config(cfg);
    sc.seed = static_cast<std::uint64_t>(
        cfg.get_or("sim.seed", static_cast<std::int64_t>(sc.seed)));
    sc.start_airspeed = cfg.get_or("sim.start_airspeed_mps", sc.start_airspeed);
    sc.powered_trim = cfg.get_or("sim.powered_trim", sc.powered_trim);
    sc.thrust = cfg.get_or("sim.thrust_n", sc.thrust);
    const std::string source = cfg.get_or("sim.wind_source", std::string("estimate"));
    if (source == "estimate") {
        sc.wind_source = WindSource::Estimate;
    } else if (source == "truth") {
        sc.wind_source = WindSource::Truth;
    } else if (source == "truth_noisy") {
        sc.wind_source = WindSource::TruthNoisy;
    } else {
        throw ConfigError("sim.wind_source must be estimate|truth|truth_noisy");
    }
    sc.wind_noise_sigma = cfg.get_or("sim.wind_noise_sigma_mps", sc.wind_noise_sigma);
    sc.run_ekf = cfg.get_or("sim.run_ekf", sc.run_ekf);
    sc.ekf_rate_hz = cfg.get_or("sim.ekf_rate_hz", sc.ekf_rate_hz);
    sc.divergence_error = cfg.get_or("sim.divergence_error_m", sc.divergence_error);
    return sc;
}

RolloutTrace run_rollout(const ScenarioConfig &cfg, const AircraftParams &aircraft,
                         const ControllerGains &gains, const PathProvider &paths) {
    RolloutTrace trace;
    trace.record_dt = cfg.plant_dt * cfg.outer_decimation;
    if (cfg.duration <= 0.0) return trace;

    const int total_steps = static_cast<int>(std::round(cfg.duration / cfg.plant_dt));
    const int ekf_decimation = std::max(
        1, static_cast<int>(std::round(1.0 / (cfg.ekf_rate_hz * cfg.plant_dt))));

    Rng sensor_rng = Rng::substream(cfg.seed, "sensors");
    Rng gust_rng = Rng::substream(cfg.seed, "gusts");
    Rng wind_noise_rng = Rng::substream(cfg.seed, "wind-noise");

    // Reference path and start state on it.
    double v0 = cfg.start_airspeed;
    PathSpline path = paths.select(cfg.nominal_wind, v0 > 0.0 ? v0 : 15.0);
    if (v0 <= 0.0) v0 = path.design_airspeed > 0.0 ? path.design_airspeed : 15.0;

    RigidBodyState state;
    state.r = eval_path(path, 0.0);
    const Eigen::Vector3d tangent = eval_path(path, 0.0, 1).normalized();
    const Eigen::Vector3d wind0 = wind_at(cfg.true_wind, state.r.z());
    // Inertial speed k solving |k t - w| = v0 along the path tangent.
    const double tw = tangent.dot(wind0);
    const double disc = std::max(tw * tw - wind0.squaredNorm() + v0 * v0, 1.0);
    const double k_speed = tw + std::sqrt(disc);
    state.v = k_speed * tangent;
    const AttitudeCommand att0 =
        attitude_on_path(path, 0.0, k_speed, wind_at(cfg.nominal_wind, state.r.z()), aircraft);
    state.q = Eigen::Quaterniond(att0.r_ib).normalized();
    state.omega = Eigen::Vector3d::Zero();

    PathFollowingController controller(aircraft, gains, 1.0 / cfg.plant_dt, cfg.outer_decimation);
    controller.set_path(path);

    RigidBodyOptions plant_opt;
    plant_opt.thrust = cfg.thrust;
    if (cfg.powered_trim && cfg.thrust == 0.0) plant_opt.thrust = trim_thrust(aircraft, v0);

    const BodyFlowFit flow_fit = fit_body_flow_coeffs(aircraft);
    EstimatorBelief belief = initial_belief(state.r.z());
    EstimatorNoise ekf_noise;
    double last_ekf_t = 0.0;
    bool belief_started = false;

    // Gusts: exact OU discretization per axis.
    Eigen::Vector3d gust = Eigen::Vector3d::Zero();
    const double ou_decay = std::exp(-cfg.plant_dt / std::max(cfg.gust.tau_corr, 1e-3));
    const double ou_scale = cfg.gust.sigma * std::sqrt(1.0 - ou_decay * ou_decay);

    SurfaceDeflections actual;  // plant-side servo state
    Eigen::Vector3d wind_est_prev = wind_at(cfg.nominal_wind, state.r.z());
    double tracking_error = 0.0;

    for (int step = 0; step < total_steps; ++step) {
        const double t = step * cfg.plant_dt;
        const Eigen::Vector3d wind_true = wind_at(cfg.true_wind, state.r.z()) + gust;

        // Plant-side quantities the sensors observe.
        const Eigen::Vector3d f_spec =
            specific_force_body(state, actual, wind_true, aircraft, plant_opt) +
            state.q.toRotationMatrix().transpose() * cfg.disturbance_force / aircraft.mass;
        const Eigen::Vector3d v_air_body =
            state.q.toRotationMatrix().transpose() * (state.v - wind_true);
        const double tas_true = v_air_body.norm();

        SensorData sensors;
        sensors.t = t;
        sensors.r = state.r + cfg.noise.position * normal3(sensor_rng);
        sensors.v = state.v + cfg.noise.velocity * normal3(sensor_rng);
        sensors.q = perturb_attitude(state.q, cfg.noise.attitude * normal3(sensor_rng));
        sensors.omega = state.omega + cfg.noise.gyro * normal3(sensor_rng);
        sensors.accel_body = f_spec + cfg.noise.accel * normal3(sensor_rng);
        sensors.tas = std::max(tas_true + cfg.noise.airspeed * sensor_rng.normal(), 0.1);
        sensors.cas = std::max(tas_true + cfg.noise.airspeed * sensor_rng.normal(), 0.1);

        switch (cfg.wind_source) {
            case WindSource::Truth:
                sensors.wind_local = wind_true;
                break;
            case WindSource::TruthNoisy:
                sensors.wind_local = wind_true + cfg.wind_noise_sigma * normal3(wind_noise_rng);
                break;
            case WindSource::Estimate: {
                AirdataSample sample;
                sample.t = t;
                sample.tas = sensors.tas;
                sample.cas = sensors.cas;
                sample.accel = sensors.accel_body;
                sample.q = sensors.q;
                sample.v_ins = sensors.v;
                sample.alt = sensors.r.z();
                try {
                    wind_est_prev = local_wind_estimate(sample, aircraft, flow_fit);
                } catch (const std::exception &) {
                    // keep the previous estimate through brief dropouts
                }
                sensors.wind_local = wind_est_prev;
                break;
            }
        }

        if (cfg.run_ekf && step % ekf_decimation == 0) {
            const double dt_ekf = belief_started ? t - last_ekf_t : 1.0 / cfg.ekf_rate_hz;
            if (dt_ekf > 0.0) {
                const Eigen::Vector2d meas(sensors.wind_local.x(), sensors.wind_local.y());
                belief = ekf_step(belief, meas, sensors.r.z(), dt_ekf, ekf_noise).first;
                last_ekf_t = t;
                belief_started = true;
            }
        }

        ControlDiagnostics diag;
        const SurfaceDeflections cmd = controller.step(sensors, &diag);

        if (step % cfg.outer_decimation == 0) {
            tracking_error = diag.ref.distance;
            AirdataSample sample;
            sample.t = t;
            sample.tas = sensors.tas;
            sample.cas = sensors.cas;
            sample.accel = sensors.accel_body;
            sample.q = sensors.q;
            sample.v_ins = sensors.v;
            sample.alt = sensors.r.z();
            trace.airdata.push_back(sample);

            TraceRecord rec;
            rec.t = t;
            rec.r = state.r;
            rec.v = state.v;
            rec.q = state.q;
            rec.omega = state.omega;
            rec.tas = tas_true;
            rec.alpha = tas_true > 0.5 ? angle_of_attack(v_air_body) : 0.0;
            rec.beta = tas_true > 0.5 ? sideslip(v_air_body) : 0.0;
            rec.tau = diag.ref.tau;
            rec.ref_r = diag.ref.r;
            rec.tracking_error = tracking_error;
            rec.cmd = cmd;
            rec.wind_true = wind_true;
            rec.wind_est = sensors.wind_local;
            rec.ekf_mean = belief.mean;
            rec.ekf_var = belief.cov.diagonal();
            rec.energy = specific_energy(tas_true, state.r.z());
            rec.switched = false;

            if (diag.wrapped) {
                ++trace.cycles_completed;
                const PathSpline next = paths.select(cfg.nominal_wind, tas_true);
                controller.set_path(next, true);
                rec.switched = true;
            }
            trace.records.push_back(rec);
        }

        // Divergence check before advancing the plant.
        if (!state.finite() || tracking_error > cfg.divergence_error) {
            trace.diverged = true;
            trace.diverged_at = t;
            trace.divergence_reason = !state.finite() ? "non-finite state" : "tracking error bound";
            break;
        }

        // Plant-side first-order servos, then the rigid-body step.
        const double k_servo = std::clamp(cfg.plant_dt / std::max(gains.servo_tau, 1e-4), 0.0, 1.0);
        actual.ail += k_servo * (cmd.ail - actual.ail);
        actual.ele += k_servo * (cmd.ele - actual.ele);
        actual.rud += k_servo * (cmd.rud - actual.rud);

        try {
            RigidBodyState next = rigid_body_step(state, actual, wind_true, aircraft, cfg.plant_dt,
                                                  plant_opt);
            next.v += cfg.disturbance_force / aircraft.mass * cfg.plant_dt;
            state = next;
        } catch (const std::exception &) {
            trace.diverged = true;
            trace.diverged_at = t;
            trace.divergence_reason = "integration fault";
            break;
        }

        gust = ou_decay * gust + ou_scale * normal3(gust_rng);
    }
    return trace;
}

RolloutMetrics compute_metrics(const RolloutTrace &trace) {
    RolloutMetrics m;
    m.diverged = trace.diverged;
    m.cycles_completed = trace.cycles_completed;
    if (trace.empty()) return m;

    double sum_sq = 0.0;
    double last_cycle_energy = trace.records.front().energy;
    const double settle_threshold = 3.0;
    double pending_switch = -1.0;
    for (const auto &rec : trace.records) {
        sum_sq += rec.tracking_error * rec.tracking_error;
        m.max_tracking_error = std::max(m.max_tracking_error, rec.tracking_error);
        m.airspeed_vs_height.emplace_back(rec.r.z(), rec.tas);
        if (rec.switched) {
            m.cycle_energy_delta.push_back(rec.energy - last_cycle_energy);
            last_cycle_energy = rec.energy;
            m.switch_times.push_back(rec.t);
            pending_switch = rec.t;
        } else if (pending_switch >= 0.0 && rec.tracking_error < settle_threshold) {
            m.settle_times.push_back(rec.t - pending_switch);
            pending_switch = -1.0;
        }
    }
    m.rms_tracking_error = std::sqrt(sum_sq / trace.records.size());
    m.initial_energy = trace.records.front().energy;
    m.terminal_energy = trace.records.back().energy;
    return m;
}

CampaignSummary run_monte_carlo(const ScenarioConfig &cfg, const WindSigmas &sigmas, int count,
                                const AircraftParams &aircraft, const ControllerGains &gains,
                                const PathProvider &paths) {
    if (count < 1) throw std::invalid_argument("run_monte_carlo: count must be >= 1");
    const ScenarioSet fields =
        sample_perturbed_fields(cfg.nominal_wind, sigmas, count, cfg.seed);

    CampaignSummary summary;
    double rms_sum = 0.0;
    for (int j = 1; j <= count; ++j) {
        ScenarioConfig run_cfg = cfg;
        run_cfg.true_wind = fields.fields[j];
        run_cfg.seed = derive_seed(cfg.seed, static_cast<std::uint64_t>(j));
        const RolloutTrace trace = run_rollout(run_cfg, aircraft, gains, paths);

        CampaignRun run;
        run.index = j;
        run.true_field = fields.fields[j];
        run.metrics = compute_metrics(trace);
        if (run.metrics.diverged) {
            ++summary.diverged_count;
        } else {
            ++summary.completed_count;
            rms_sum += run.metrics.rms_tracking_error;
            summary.worst_max_error = std::max(summary.worst_max_error, run.metrics.max_tracking_error);
        }
        summary.runs.push_back(std::move(run));
    }
    if (summary.completed_count > 0) summary.mean_rms_error = rms_sum / summary.completed_count;
    return summary;
}

std::string campaign_summary_json(const CampaignSummary &summary) {
    nlohmann::json j;
    j["diverged_count"] = summary.diverged_count;
    j["completed_count"] = summary.completed_count;
    j["worst_max_error_m"] = summary.worst_max_error;
    j["mean_rms_error_m"] = summary.mean_rms_error;
    nlohmann::json runs = nlohmann::json::array();
    for (const auto &run : summary.runs) {
        nlohmann::json r;
        r["index"] = run.index;
        r["wind"] = {{"w0x", run.true_field.w0x}, {"w0y", run.true_field.w0y},
                     {"bx", run.true_field.bx},   {"by", run.true_field.by},
                     {"s", run.true_field.s},     {"h", run.true_field.h}};
        r["diverged"] = run.metrics.diverged;
        r["rms_error_m"] = run.metrics.rms_tracking_error;
        r["max_error_m"] = run.metrics.max_tracking_error;
        r["cycles"] = run.metrics.cycles_completed;
        r["energy_delta_jpkg"] = run.metrics.terminal_energy - run.metrics.initial_energy;
        runs.push_back(r);
    }
    j["runs"] = runs;
    return j.dump(1);
}

}  // namespace dsoar
