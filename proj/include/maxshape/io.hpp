#pragma once

#include <maxshape/nonsmooth.hpp>
#include <maxshape/optimizer.hpp>
#include <maxshape/verify.hpp>

#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace maxshape {

class IOError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

inline constexpr const char* history_header = "iter,J_inf,J_2,n_active,epsilon,step,psi,wall_ms";

/// 17 significant digits, LF line endings, one row per record.
void write_history(const RunHistory& history, const std::filesystem::path& path);
std::string format_history(const RunHistory& history);
/// Rows only; the termination reason is not stored.
RunHistory read_history(const std::filesystem::path& path);
RunHistory parse_history(const std::string& text);

/// Boundary polygon as `x,y` rows closed by repeating the first vertex,
/// followed by an `active_x,active_y` block when an active set is given.
void write_shape(const Mesh& mesh, const ActiveSet* active, const std::filesystem::path& path);
std::string format_shape(const Mesh& mesh, const ActiveSet* active);

struct ShapeFile {
    std::vector<Point> polygon; ///< includes the closing vertex
    std::vector<Point> active;
};
ShapeFile parse_shape(const std::string& text);

/// Legacy ASCII VTK unstructured grid with point data.
void write_vtk(const Mesh& mesh, const std::map<std::string, const ScalarField*>& scalars,
               const std::map<std::string, const VecField*>& vectors, const std::filesystem::path& path);

/// `test,metric,value,pass` with pass as 0/1.
void write_report(const std::vector<ReportRow>& rows, const std::filesystem::path& path);
std::string format_report(const std::vector<ReportRow>& rows);

std::string format_double(double v);

} // namespace maxshape
