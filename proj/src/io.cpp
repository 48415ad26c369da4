#include <maxshape/io.hpp>

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

namespace maxshape {

namespace {
    void write_text(const std::string& text, const std::filesystem::path& path)
    {
        if (path.has_parent_path()) {
            std::error_code ec;
            std::filesystem::create_directories(path.parent_path(), ec);
        }
        std::ofstream out(path, std::ios::binary | std::ios::trunc);
        if (!out) throw IOError("cannot open '" + path.string() + "' for writing");
        out << text;
        out.flush();
        if (!out) throw IOError("write to '" + path.string() + "' failed");
    }

    std::string read_text(const std::filesystem::path& path)
    {
        std::ifstream in(path, std::ios::binary);
        if (!in) throw IOError("cannot open '" + path.string() + "'");
        std::ostringstream ss;
        ss << in.rdbuf();
        return ss.str();
    }

    std::vector<std::string> split(const std::string& line, char sep)
    {
        std::vector<std::string> out;
        std::string cell;
        std::istringstream ss(line);
        while (std::getline(ss, cell, sep)) out.push_back(cell);
        if (!line.empty() && line.back() == sep) out.emplace_back();
        return out;
    }

    double parse_double(const std::string& s)
    {
        char* end = nullptr;
        const double v = std::strtod(s.c_str(), &end);
        if (s.empty() || end != s.c_str() + s.size()) throw IOError("malformed number '" + s + "'");
        return v;
    }

    int parse_int(const std::string& s)
    {
        char* end = nullptr;
        const long v = std::strtol(s.c_str(), &end, 10);
        if (s.empty() || end != s.c_str() + s.size()) throw IOError("malformed integer '" + s + "'");
        return static_cast<int>(v);
    }

    std::vector<std::string> lines_of(const std::string& text)
    {
        std::vector<std::string> lines;
        std::istringstream ss(text);
        std::string line;
        while (std::getline(ss, line)) {
            if (!line.empty() && line.back() == '\r') line.pop_back();
            lines.push_back(line);
        }
        return lines;
    }
} // namespace

std::string format_double(double v)
{
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string format_history(const RunHistory& history)
{
    std::string out = std::string(history_header) + "\n";
    for (const auto& r : history.rows) {
        out += std::to_string(r.iter) + ',' + format_double(r.j_inf) + ',' + format_double(r.j_2) + ',' +
               std::to_string(r.n_active) + ',' + format_double(r.epsilon) + ',' + format_double(r.step) + ',' +
               format_double(r.psi) + ',' + format_double(r.wall_ms) + '\n';
    }
    return out;
}

void write_history(const RunHistory& history, const std::filesystem::path& path)
{
    write_text(format_history(history), path);
}

RunHistory parse_history(const std::string& text)
{
    const auto lines = lines_of(text);
    if (lines.empty() || lines[0] != history_header) throw IOError("history file lacks the expected header");
    RunHistory h;
    for (std::size_t i = 1; i < lines.size(); ++i) {
        if (lines[i].empty()) continue;
        const auto c = split(lines[i], ',');
        if (c.size() != 8) throw IOError("history row " + std::to_string(i) + " has " + std::to_string(c.size()) + " columns");
        IterationRecord r;
        r.iter = parse_int(c[0]);
        r.j_inf = parse_double(c[1]);
        r.j_2 = parse_double(c[2]);
        r.n_active = parse_int(c[3]);
        r.epsilon = parse_double(c[4]);
        r.step = parse_double(c[5]);
        r.psi = parse_double(c[6]);
        r.wall_ms = parse_double(c[7]);
        h.rows.push_back(r);
    }
    return h;
}

RunHistory read_history(const std::filesystem::path& path) { return parse_history(read_text(path)); }

std::string format_shape(const Mesh& mesh, const ActiveSet* active)
{
    std::string out = "x,y\n";
    auto row = [&out](const Point& p) { out += format_double(p.x()) + ',' + format_double(p.y()) + '\n'; };
    for (int i : mesh.boundary()) row(mesh.node(i));
    if (!mesh.boundary().empty()) row(mesh.node(mesh.boundary().front()));
    if (active) {
        out += "active_x,active_y\n";
        for (int i : active->nodes) row(mesh.node(i));
    }
    return out;
}

void write_shape(const Mesh& mesh, const ActiveSet* active, const std::filesystem::path& path)
{
    write_text(format_shape(mesh, active), path);
}

ShapeFile parse_shape(const std::string& text)
{
    const auto lines = lines_of(text);
    if (lines.empty() || lines[0] != "x,y") throw IOError("shape file lacks the x,y header");
    ShapeFile shape;
    std::vector<Point>* target = &shape.polygon;
    for (std::size_t i = 1; i < lines.size(); ++i) {
        if (lines[i].empty()) continue;
        if (lines[i] == "active_x,active_y") {
            target = &shape.active;
            continue;
        }
        const auto c = split(lines[i], ',');
        if (c.size() != 2) throw IOError("shape row " + std::to_string(i) + " needs two columns");
        target->emplace_back(parse_double(c[0]), parse_double(c[1]));
    }
    return shape;
}

void write_vtk(const Mesh& mesh, const std::map<std::string, const ScalarField*>& scalars,
               const std::map<std::string, const VecField*>& vectors, const std::filesystem::path& path)
{
    std::string out = "# vtk DataFile Version 3.0\nmaxshape mesh\nASCII\nDATASET UNSTRUCTURED_GRID\n";
    out += "POINTS " + std::to_string(mesh.num_nodes()) + " double\n";
    for (const auto& p : mesh.nodes()) out += format_double(p.x()) + ' ' + format_double(p.y()) + " 0\n";
    out += "CELLS " + std::to_string(mesh.num_triangles()) + ' ' + std::to_string(4 * mesh.num_triangles()) + '\n';
    for (const auto& t : mesh.triangles())
        out += "3 " + std::to_string(t[0]) + ' ' + std::to_string(t[1]) + ' ' + std::to_string(t[2]) + '\n';
    out += "CELL_TYPES " + std::to_string(mesh.num_triangles()) + '\n';
    for (int k = 0; k < mesh.num_triangles(); ++k) out += "5\n";

    out += "POINT_DATA " + std::to_string(mesh.num_nodes()) + '\n';
    out += "SCALARS marker int 1\nLOOKUP_TABLE default\n";
    for (int i = 0; i < mesh.num_nodes(); ++i) out += mesh.is_dirichlet(i) ? "1\n" : "0\n";
    for (const auto& [name, field] : scalars) {
        if (field->coeffs.size() != mesh.num_nodes()) throw IOError("field '" + name + "' lives on another mesh");
        out += "SCALARS " + name + " double 1\nLOOKUP_TABLE default\n";
        for (int i = 0; i < mesh.num_nodes(); ++i) out += format_double(field->coeffs[i]) + '\n';
    }
    for (const auto& [name, field] : vectors) {
        if (field->coeffs.size() != 2 * mesh.num_nodes()) throw IOError("field '" + name + "' lives on another mesh");
        out += "VECTORS " + name + " double\n";
        for (int i = 0; i < mesh.num_nodes(); ++i)
            out += format_double(field->coeffs[2 * i]) + ' ' + format_double(field->coeffs[2 * i + 1]) + " 0\n";
    }
    write_text(out, path);
}

std::string format_report(const std::vector<ReportRow>& rows)
{
    std::string out = "test,metric,value,pass\n";
    for (const auto& r : rows) out += r.test + ',' + r.metric + ',' + format_double(r.value) + ',' + (r.pass ? "1" : "0") + '\n';
    return out;
}

void write_report(const std::vector<ReportRow>& rows, const std::filesystem::path& path)
{
    write_text(format_report(rows), path);
}

} // namespace maxshape
