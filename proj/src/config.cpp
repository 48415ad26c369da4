#include <maxshape/config.hpp>
#include <maxshape/errors.hpp>

#include <json.hpp>

#include <fstream>
#include <set>
#include <sstream>

namespace maxshape {

namespace {
    using nlohmann::json;

    /// Reads the members of one JSON object and rejects the ones nobody asked for.
    class Section {
    public:
        Section(const json& node, std::string path) : node_(node), path_(std::move(path))
        {
            if (!node_.is_object()) throw ConfigError("'" + path_ + "' must be an object");
        }

        ~Section() noexcept(false)
        {
            if (std::uncaught_exceptions() > 0) return;
            for (const auto& [key, value] : node_.items())
                if (!seen_.count(key)) throw ConfigError("unknown key '" + qualified(key) + "'");
        }

        /// False when the key is absent and out keeps its default.
        template <class T>
        bool read(const std::string& key, T& out)
        {
            seen_.insert(key);
            if (!node_.contains(key)) return false;
            try {
                out = node_.at(key).get<T>();
            } catch (const json::exception&) {
                throw ConfigError("wrong type for '" + qualified(key) + "'");
            }
            return true;
        }

        void read(const std::string& key, double& out)
        {
            seen_.insert(key);
            if (!node_.contains(key)) return;
            const json& v = node_.at(key);
            if (!v.is_number()) throw ConfigError("'" + qualified(key) + "' must be a number");
            out = v.get<double>();
        }

        void read(const std::string& key, int& out)
        {
            seen_.insert(key);
            if (!node_.contains(key)) return;
            const json& v = node_.at(key);
            if (!v.is_number_integer()) throw ConfigError("'" + qualified(key) + "' must be an integer");
            out = v.get<int>();
        }

        template <class F>
        void section(const std::string& key, F&& body)
        {
            seen_.insert(key);
            if (!node_.contains(key)) return;
            Section sub(node_.at(key), qualified(key));
            body(sub);
        }

        std::string qualified(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

    private:
        const json& node_;
        std::string path_;
        std::set<std::string> seen_;
    };

    template <class Enum, class Parse>
    void read_enum(Section& s, const std::string& key, Enum& out, Parse parse)
    {
        std::string name;
        if (s.read(key, name)) out = parse(name);
    }
} // namespace

ConfigFile parse_config(const std::string& text)
{
    json root;
    try {
        root = json::parse(text, nullptr, true, true);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("malformed config: ") + e.what());
    }

    ConfigFile cfg;
    RunConfig& run = cfg.run;
    {
        Section top(root, "");
        top.section("problem", [&](Section& s) {
            s.read("load", run.load);
            s.read("target", run.target);
            s.read("law", run.law);
        });
        top.section("domain", [&](Section& s) {
            s.read("shape", run.domain.shape);
            std::vector<double> center{run.domain.center.x(), run.domain.center.y()};
            s.read("center", center);
            if (center.size() != 2) throw ConfigError("'domain.center' needs two coordinates");
            run.domain.center = Point(center[0], center[1]);
            s.read("radius", run.domain.radius);
            s.read("n_boundary", run.domain.n_boundary);
            s.read("target_h", run.domain.target_h);
            s.read("square_n", run.domain.square_n);
        });
        top.section("optimizer", [&](Section& s) {
            read_enum(s, "cost", cfg.cost, cost_kind_from_string);
            read_enum(s, "metric", run.metric, metric_from_string);
            read_enum(s, "deform", run.deform, deform_mode_from_string);
            read_enum(s, "step_mode", run.step_mode, step_mode_from_string);
            s.read("n2", run.n2);
            s.read("gamma", run.gamma);
            s.read("t0", run.t0);
            s.read("backtrack_factor", run.backtrack_factor);
            s.read("max_backtracks", run.max_backtracks);
            s.read("max_iterations", run.max_iterations);
            s.read("stat_tol", run.stat_tol);
            s.read("threads", run.threads);
        });
        top.section("quality", [&](Section& s) {
            s.read("area_floor", run.floors.area_floor);
            s.read("angle_floor_rad", run.floors.angle_floor);
        });
        top.section("output", [&](Section& s) {
            s.read("dir", run.output_dir);
            s.read("snapshot_every", run.snapshot_every);
            s.read("record_wall_time", run.record_wall_time);
        });
        top.section("verify", [&](Section& s) {
            s.read("suites", cfg.verify.suites);
            s.read("report", cfg.verify.report);
        });
    }
    run.validate();
    return cfg;
}

ConfigFile load_config(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read config '" + path.string() + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

std::string config_template(const ConfigFile& cfg)
{
    const RunConfig& r = cfg.run;
    std::ostringstream o;
    auto entry = [&o](const std::string& key, const json& value, bool last, const std::string& comment = {}) {
        std::string line = "    \"" + key + "\": " + value.dump() + (last ? "" : ",");
        if (!comment.empty()) line += std::string(line.size() < 40 ? 40 - line.size() : 1, ' ') + "// " + comment;
        o << line << '\n';
    };
    auto open = [&o](const std::string& name) { o << "  \"" << name << "\": {\n"; };

    o << "// maxshape configuration. Every key is optional; unknown keys are rejected.\n{\n";
    open("problem");
    entry("load", r.load, false, "manufactured | zero");
    entry("target", r.target, false, "sine | zero");
    entry("law", r.law, true, "unit | saturating");
    o << "  },\n";
    open("domain");
    entry("shape", r.domain.shape, false, "disk | square");
    entry("center", std::vector<double>{r.domain.center.x(), r.domain.center.y()}, false);
    entry("radius", r.domain.radius, false);
    entry("n_boundary", r.domain.n_boundary, false);
    entry("target_h", r.domain.target_h, false, "interior lattice spacing");
    entry("square_n", r.domain.square_n, true, "cells per side when shape is square");
    o << "  },\n";
    open("optimizer");
    entry("cost", to_string(cfg.cost), false, "linfty | l2");
    entry("metric", to_string(r.metric), false, "sobolev | euclidean");
    entry("deform", to_string(r.deform), false, "harmonic | direct");
    entry("step_mode", to_string(r.step_mode), false, "backtracking | constant");
    entry("n2", r.n2, false, "active points beyond the argmax");
    entry("gamma", r.gamma, false, "sufficient-decrease ratio");
    entry("t0", r.t0, false, "0 means 0.5 h_max of the initial mesh");
    entry("backtrack_factor", r.backtrack_factor, false);
    entry("max_backtracks", r.max_backtracks, false);
    entry("max_iterations", r.max_iterations, false);
    entry("stat_tol", r.stat_tol, false, "negative means 1e-8 (1 + |X_1|)");
    entry("threads", r.threads, true, "workers for the gradient bundle");
    o << "  },\n";
    open("quality");
    entry("area_floor", r.floors.area_floor, false);
    entry("angle_floor_rad", r.floors.angle_floor, true);
    o << "  },\n";
    open("output");
    entry("dir", r.output_dir, false);
    entry("snapshot_every", r.snapshot_every, false, "0 writes the first and last shape only");
    entry("record_wall_time", r.record_wall_time, true, "false writes 0 for byte-stable output");
    o << "  },\n";
    open("verify");
    entry("suites", cfg.verify.suites, false, "convergence | taylor | danskin | reciprocity | all");
    entry("report", cfg.verify.report, true);
    o << "  }\n}\n";
    return o.str();
}

std::string config_template() { return config_template(ConfigFile{}); }

} // namespace maxshape
