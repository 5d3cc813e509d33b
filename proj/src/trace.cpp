#include "dsoar/trace.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace dsoar {

namespace {

const char *kTraceHeader =
    "t_s,x_m,y_m,z_m,vx_mps,vy_mps,vz_mps,qw,qx,qy,qz,p_rps,q_rps,r_rps,tas_mps,alpha_rad,"
    "beta_rad,tau,ref_x_m,ref_y_m,ref_z_m,err_m,ail_rad,ele_rad,rud_rad,wind_true_x_mps,"
    "wind_true_y_mps,wind_true_z_mps,wind_est_x_mps,wind_est_y_mps,wind_est_z_mps,ekf_w0x,"
    "ekf_w0y,ekf_bx,ekf_by,ekf_s,ekf_h,ekf_var_w0x,ekf_var_w0y,ekf_var_bx,ekf_var_by,ekf_var_s,"
    "ekf_var_h,energy_jpkg,switched";

void append(std::string &line, double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    line += buf;
    line += ',';
}

std::vector<double> split_doubles(const std::string &line, std::size_t expected) {
    std::vector<double> out;
    out.reserve(expected);
    std::size_t start = 0;
    while (start <= line.size()) {
        const auto comma = line.find(',', start);
        const std::string tok =
            line.substr(start, comma == std::string::npos ? std::string::npos : comma - start);
        if (!tok.empty()) out.push_back(std::stod(tok));
        if (comma == std::string::npos) break;
        start = comma + 1;
    }
    if (out.size() != expected)
        throw std::runtime_error("csv row has " + std::to_string(out.size()) + " fields, expected " +
                                 std::to_string(expected));
    return out;
}

}  // namespace

void write_trace_csv(const RolloutTrace &trace, const std::string &path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write trace file: " + path);
    out << kTraceHeader << "\n";
    // Run-level flags ride in a comment so a single file round-trips.
    out << "# record_dt=" << trace.record_dt << " diverged=" << (trace.diverged ? 1 : 0)
        << " diverged_at=" << trace.diverged_at << " cycles=" << trace.cycles_completed << "\n";
    for (const auto &rec : trace.records) {
        std::string line;
        line.reserve(1024);
        append(line, rec.t);
        for (int d = 0; d < 3; ++d) append(line, rec.r[d]);
        for (int d = 0; d < 3; ++d) append(line, rec.v[d]);
        append(line, rec.q.w());
        append(line, rec.q.x());
        append(line, rec.q.y());
        append(line, rec.q.z());
        for (int d = 0; d < 3; ++d) append(line, rec.omega[d]);
        append(line, rec.tas);
        append(line, rec.alpha);
        append(line, rec.beta);
        append(line, rec.tau);
        for (int d = 0; d < 3; ++d) append(line, rec.ref_r[d]);
        append(line, rec.tracking_error);
        append(line, rec.cmd.ail);
        append(line, rec.cmd.ele);
        append(line, rec.cmd.rud);
        for (int d = 0; d < 3; ++d) append(line, rec.wind_true[d]);
        for (int d = 0; d < 3; ++d) append(line, rec.wind_est[d]);
        for (int d = 0; d < 6; ++d) append(line, rec.ekf_mean[d]);
        for (int d = 0; d < 6; ++d) append(line, rec.ekf_var[d]);
        append(line, rec.energy);
        line += rec.switched ? '1' : '0';
        out << line << "\n";
    }
}

RolloutTrace read_trace_csv(const std::string &path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open trace file: " + path);
    std::string line;
    if (!std::getline(in, line) || line != kTraceHeader)
        throw std::runtime_error("trace file has unexpected header: " + path);

    RolloutTrace trace;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        if (line.front() == '#') {
            std::istringstream meta(line.substr(1));
            std::string tok;
            while (meta >> tok) {
                const auto eq = tok.find('=');
                if (eq == std::string::npos) continue;
                const std::string key = tok.substr(0, eq);
                const std::string val = tok.substr(eq + 1);
                if (key == "record_dt") trace.record_dt = std::stod(val);
                if (key == "diverged") trace.diverged = val == "1";
                if (key == "diverged_at") trace.diverged_at = std::stod(val);
                if (key == "cycles") trace.cycles_completed = std::stoi(val);
            }
            continue;
        }
        const auto f = split_doubles(line, 45);
        TraceRecord rec;
        int k = 0;
        rec.t = f[k++];
        for (int d = 0; d < 3; ++d) rec.r[d] = f[k++];
        for (int d = 0; d < 3; ++d) rec.v[d] = f[k++];
        const double qw = f[k++], qx = f[k++], qy = f[k++], qz = f[k++];
        rec.q = Eigen::Quaterniond(qw, qx, qy, qz);
        for (int d = 0; d < 3; ++d) rec.omega[d] = f[k++];
        rec.tas = f[k++];
        rec.alpha = f[k++];
        rec.beta = f[k++];
        rec.tau = f[k++];
        for (int d = 0; d < 3; ++d) rec.ref_r[d] = f[k++];
        rec.tracking_error = f[k++];
        rec.cmd.ail = f[k++];
        rec.cmd.ele = f[k++];
        rec.cmd.rud = f[k++];
        for (int d = 0; d < 3; ++d) rec.wind_true[d] = f[k++];
        for (int d = 0; d < 3; ++d) rec.wind_est[d] = f[k++];
        for (int d = 0; d < 6; ++d) rec.ekf_mean[d] = f[k++];
        for (int d = 0; d < 6; ++d) rec.ekf_var[d] = f[k++];
        rec.energy = f[k++];
        rec.switched = f[k++] != 0.0;
        trace.records.push_back(rec);
    }
    return trace;
}

void write_airdata_csv(const std::vector<AirdataSample> &samples, const std::string &path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write airdata file: " + path);
    out << "t_s,tas_mps,cas_mps,acc_x_mps2,acc_y_mps2,acc_z_mps2,qw,qx,qy,qz,vel_e_mps,"
           "vel_n_mps,vel_u_mps,alt_m\n";
    for (const auto &s : samples) {
        std::string line;
        append(line, s.t);
        append(line, s.tas);
        append(line, s.cas);
        for (int d = 0; d < 3; ++d) append(line, s.accel[d]);
        append(line, s.q.w());
        append(line, s.q.x());
        append(line, s.q.y());
        append(line, s.q.z());
        for (int d = 0; d < 3; ++d) append(line, s.v_ins[d]);
        char buf[40];
        std::snprintf(buf, sizeof(buf), "%.17g", s.alt);
        line += buf;
        out << line << "\n";
    }
}

std::vector<AirdataSample> read_airdata_csv(const std::string &path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open airdata file: " + path);
    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error("airdata file empty: " + path);

    std::vector<AirdataSample> out;
    double prev_t = -1e300;
    while (std::getline(in, line)) {
        if (line.empty() || line.front() == '#') continue;
        const auto f = split_doubles(line, 14);
        AirdataSample s;
        int k = 0;
        s.t = f[k++];
        s.tas = f[k++];
        s.cas = f[k++];
        for (int d = 0; d < 3; ++d) s.accel[d] = f[k++];
        const double qw = f[k++], qx = f[k++], qy = f[k++], qz = f[k++];
        s.q = Eigen::Quaterniond(qw, qx, qy, qz).normalized();
        for (int d = 0; d < 3; ++d) s.v_ins[d] = f[k++];
        s.alt = f[k++];
        if (s.t <= prev_t) throw std::runtime_error("airdata timestamps must strictly increase");
        prev_t = s.t;
        out.push_back(s);
    }
    return out;
}

void write_convergence_csv(const std::vector<ConvergenceRecord> &records, const std::string &path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write convergence file: " + path);
    out << "t_s,w0x_mps,w0y_mps,bx_mps,by_mps,s_per_m,h_m,var_w0x,var_w0y,var_bx,var_by,var_s,"
           "var_h,gated\n";
    for (const auto &rec : records) {
        std::string line;
        append(line, rec.t);
        for (int d = 0; d < 6; ++d) append(line, rec.mean[d]);
        for (int d = 0; d < 6; ++d) append(line, rec.var[d]);
        line += rec.gated ? '1' : '0';
        out << line << "\n";
    }
}

}  // namespace dsoar
