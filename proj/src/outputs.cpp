#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "beamforge/errors.hpp"
#include "beamforge/experiment.hpp"

namespace beamforge {

namespace {

namespace fs = std::filesystem;

constexpr double kDbFloor = -300.0; // stands in for -inf on zero power

std::string fmt(double value) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", value);
    return buf;
}

void write_file(const fs::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw IoError("cannot open \"" + path.string() + "\" for writing");
    out << content;
    if (!out)
        throw IoError("failed while writing \"" + path.string() + "\"");
}

std::string beampattern_csv(const RunResult& r) {
    const Eigen::VectorXd hard_db = to_db_normalized(r.achieved_hard);
    std::string csv = "angle_deg,desired,achieved_soft,achieved_hard,achieved_hard_db_normalized\n";
    for (Eigen::Index k = 0; k < r.angles_deg.size(); ++k) {
        csv += fmt(r.angles_deg[k]) + ',' + fmt(r.desired[k]) + ',' + fmt(r.achieved_soft[k]) +
               ',' + fmt(r.achieved_hard[k]) + ',' + fmt(hard_db[k]) + '\n';
    }
    return csv;
}

std::string history_csv(const RunResult& r) {
    std::string csv = "step,epoch,stage,loss_total,pattern_error,penalty_rf,penalty_antenna,"
                      "alpha_rf,alpha_antenna\n";
    for (const StepRecord& rec : r.history) {
        csv += std::to_string(rec.step) + ',' + std::to_string(rec.epoch) + ',' +
               to_string(rec.stage) + ',' + fmt(rec.loss.total) + ',' + fmt(rec.loss.pattern) +
               ',' + fmt(rec.loss.penalty_rf) + ',' + fmt(rec.loss.penalty_antenna) + ',' +
               fmt(rec.alpha_rf) + ',' + fmt(rec.alpha_antenna) + '\n';
    }
    return csv;
}

nlohmann::ordered_json matrix_to_json(const Eigen::MatrixXd& m) {
    nlohmann::ordered_json rows = nlohmann::ordered_json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        nlohmann::ordered_json row = nlohmann::ordered_json::array();
        for (Eigen::Index j = 0; j < m.cols(); ++j)
            row.push_back(m(i, j));
        rows.push_back(std::move(row));
    }
    return rows;
}

std::string result_json(const RunResult& r) {
    nlohmann::ordered_json j;
    j["config"] = nlohmann::ordered_json::parse(config_to_json(r.config));
    j["rf_chain_indices"] = r.rf_selection.indices;
    j["antenna_indices"] = r.antenna_selection.indices;
    j["hardness"] = {{"rf", {{"min_max_entry", r.rf_hardness.min_max_entry},
                             {"penalty", r.rf_hardness.penalty}}},
                     {"antenna", {{"min_max_entry", r.antenna_hardness.min_max_entry},
                                  {"penalty", r.antenna_hardness.penalty}}}};
    j["final_pattern_error"] = r.final_pattern_error;
    if (!r.history.empty()) {
        const LossTerms& last = r.history.back().loss;
        j["last_step_loss"] = {{"total", last.total},
                               {"pattern", last.pattern},
                               {"penalty_rf", last.penalty_rf},
                               {"penalty_antenna", last.penalty_antenna}};
    }
    j["phases"] = matrix_to_json(r.phases);
    j["precoder_real"] = matrix_to_json(r.precoder.real());
    j["precoder_imag"] = matrix_to_json(r.precoder.imag());
    return j.dump(2) + "\n";
}

std::string run_meta_json(const RunResult& r) {
    // Kept apart from result.json so that the deterministic outputs stay
    // byte-stable across reruns.
    nlohmann::ordered_json j;
    j["duration_seconds"] = r.duration_seconds;
    j["total_steps"] = r.history.size();
    return j.dump(2) + "\n";
}

std::string xml_escape(const std::string& s) {
    std::string out;
    for (char c : s) {
        switch (c) {
        case '&': out += "&amp;"; break;
        case '<': out += "&lt;"; break;
        case '>': out += "&gt;"; break;
        case '"': out += "&quot;"; break;
        default: out += c;
        }
    }
    return out;
}

struct PlotFrame {
    double x0, x1, y0, y1;     // data ranges (y in dB, y0 top = 0)
    double px0, px1, py0, py1; // pixel box

    double px(double x) const { return px0 + (x - x0) / (x1 - x0) * (px1 - px0); }
    double py(double y) const { return py0 + (y - y0) / (y1 - y0) * (py1 - py0); }
};

std::string polyline(const PlotFrame& fr, const Eigen::VectorXd& x, const Eigen::VectorXd& y,
                     double floor_db, const std::string& style) {
    std::string pts;
    for (Eigen::Index k = 0; k < x.size(); ++k) {
        const double yv = std::max(y[k], floor_db);
        char buf[64];
        std::snprintf(buf, sizeof(buf), "%.2f,%.2f ", fr.px(x[k]), fr.py(yv));
        pts += buf;
    }
    return "  <polyline fill=\"none\" " + style + " points=\"" + pts + "\"/>\n";
}

std::string beampattern_svg(const RunResult& r) {
    const double width = 860, height = 520;
    PlotFrame fr{r.angles_deg[0], r.angles_deg[r.angles_deg.size() - 1], 0.0, -60.0,
                 70.0, width - 30.0, 30.0, height - 60.0};

    const Eigen::VectorXd desired_db = to_db_normalized(r.desired);
    const Eigen::VectorXd soft_db = to_db_normalized(r.achieved_soft);
    const Eigen::VectorXd hard_db = to_db_normalized(r.achieved_hard);

    std::string svg;
    svg += "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
    svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + std::to_string((int)width) +
           "\" height=\"" + std::to_string((int)height) + "\" viewBox=\"0 0 " +
           std::to_string((int)width) + " " + std::to_string((int)height) + "\">\n";
    svg += "  <rect x=\"0\" y=\"0\" width=\"" + std::to_string((int)width) + "\" height=\"" +
           std::to_string((int)height) + "\" fill=\"white\"/>\n";

    const std::string title = r.config.name.empty() ? "beampattern" : r.config.name;
    svg += "  <text x=\"" + std::to_string((int)(width / 2)) +
           "\" y=\"20\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"14\">" +
           xml_escape(title) + "</text>\n";

    // grid and axis labels
    for (int db = 0; db >= -60; db -= 10) {
        char buf[256];
        std::snprintf(buf, sizeof(buf),
                      "  <line x1=\"%.1f\" y1=\"%.1f\" x2=\"%.1f\" y2=\"%.1f\" "
                      "stroke=\"#dddddd\"/>\n",
                      fr.px0, fr.py(db), fr.px1, fr.py(db));
        svg += buf;
        std::snprintf(buf, sizeof(buf),
                      "  <text x=\"%.1f\" y=\"%.1f\" text-anchor=\"end\" "
                      "font-family=\"sans-serif\" font-size=\"11\">%d</text>\n",
                      fr.px0 - 6.0, fr.py(db) + 4.0, db);
        svg += buf;
    }
    const double x_span = fr.x1 - fr.x0;
    const double x_tick = x_span > 90.0 ? 30.0 : 15.0;
    for (double ang = std::ceil(fr.x0 / x_tick) * x_tick; ang <= fr.x1 + 1e-9; ang += x_tick) {
        char buf[256];
        std::snprintf(buf, sizeof(buf),
                      "  <line x1=\"%.1f\" y1=\"%.1f\" x2=\"%.1f\" y2=\"%.1f\" "
                      "stroke=\"#dddddd\"/>\n",
                      fr.px(ang), fr.py0, fr.px(ang), fr.py1);
        svg += buf;
        std::snprintf(buf, sizeof(buf),
                      "  <text x=\"%.1f\" y=\"%.1f\" text-anchor=\"middle\" "
                      "font-family=\"sans-serif\" font-size=\"11\">%g</text>\n",
                      fr.px(ang), fr.py1 + 16.0, ang);
        svg += buf;
    }
    char axis[256];
    std::snprintf(axis, sizeof(axis),
                  "  <rect x=\"%.1f\" y=\"%.1f\" width=\"%.1f\" height=\"%.1f\" fill=\"none\" "
                  "stroke=\"black\"/>\n",
                  fr.px0, fr.py0, fr.px1 - fr.px0, fr.py1 - fr.py0);
    svg += axis;
    svg += "  <text x=\"" + std::to_string((int)((fr.px0 + fr.px1) / 2)) + "\" y=\"" +
           std::to_string((int)(height - 16)) +
           "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">angle "
           "(degrees)</text>\n";
    svg += "  <text x=\"16\" y=\"" + std::to_string((int)((fr.py0 + fr.py1) / 2)) +
           "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\" "
           "transform=\"rotate(-90 16 " +
           std::to_string((int)((fr.py0 + fr.py1) / 2)) + ")\">normalized power (dB)</text>\n";

    svg += polyline(fr, r.angles_deg, desired_db, fr.y1,
                    "stroke=\"#2ca02c\" stroke-width=\"1.5\" stroke-dasharray=\"6 3\"");
    svg += polyline(fr, r.angles_deg, soft_db, fr.y1,
                    "stroke=\"#ff7f0e\" stroke-width=\"1\" opacity=\"0.7\"");
    svg += polyline(fr, r.angles_deg, hard_db, fr.y1, "stroke=\"#1f77b4\" stroke-width=\"1.8\"");

    // legend
    const char* entries[][2] = {{"#2ca02c", "desired"},
                                {"#ff7f0e", "soft selection"},
                                {"#1f77b4", "hard selection"}};
    double ly = fr.py0 + 14.0;
    for (const auto& entry : entries) {
        char buf[256];
        std::snprintf(buf, sizeof(buf),
                      "  <line x1=\"%.1f\" y1=\"%.1f\" x2=\"%.1f\" y2=\"%.1f\" stroke=\"%s\" "
                      "stroke-width=\"2\"/>\n",
                      fr.px1 - 150.0, ly, fr.px1 - 120.0, ly, entry[0]);
        svg += buf;
        std::snprintf(buf, sizeof(buf),
                      "  <text x=\"%.1f\" y=\"%.1f\" font-family=\"sans-serif\" "
                      "font-size=\"11\">%s</text>\n",
                      fr.px1 - 114.0, ly + 4.0, entry[1]);
        svg += buf;
        ly += 16.0;
    }

    svg += "</svg>\n";
    return svg;
}

} // namespace

Eigen::VectorXd to_db_normalized(const Eigen::VectorXd& powers) {
    Eigen::VectorXd db(powers.size());
    const double peak = powers.maxCoeff();
    if (!(peak > 0.0)) {
        db.setConstant(kDbFloor);
        return db;
    }
    for (Eigen::Index k = 0; k < powers.size(); ++k) {
        db[k] = powers[k] > 0.0 ? std::max(10.0 * std::log10(powers[k] / peak), kDbFloor)
                                : kDbFloor;
    }
    return db;
}

void emit_outputs(const RunResult& result, const std::string& out_dir) {
    const fs::path dir(out_dir);
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec)
        throw IoError("cannot create output directory \"" + dir.string() + "\": " + ec.message());

    write_file(dir / "beampattern.csv", beampattern_csv(result));
    write_file(dir / "history.csv", history_csv(result));
    write_file(dir / "result.json", result_json(result));
    write_file(dir / "run_meta.json", run_meta_json(result));
    write_file(dir / "beampattern.svg", beampattern_svg(result));
}

} // namespace beamforge
