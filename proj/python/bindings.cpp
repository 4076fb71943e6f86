#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "cfdscope/io.hpp"
#include "cfdscope/parallel.hpp"
#include "cfdscope/scaling.hpp"
#include "cfdscope/sim.hpp"
#include "cfdscope/solver.hpp"
#include "cfdscope/sparse.hpp"

namespace py = pybind11;
using namespace cfdscope;

namespace {

py::array_t<double> to_array(const std::vector<double>& v, std::vector<py::ssize_t> shape) {
    py::array_t<double> out(shape);
    std::copy(v.begin(), v.end(), out.mutable_data());
    return out;
}

// Arrays are indexed [k, j, i], matching the i-fastest storage order.
py::dict fields_of(const SimState& s) {
    const auto n = static_cast<py::ssize_t>(s.vel.spec().n);
    py::dict d;
    d["u"] = to_array(s.vel.u(), {n, n, n + 1});
    d["v"] = to_array(s.vel.v(), {n, n + 1, n});
    d["w"] = to_array(s.vel.w(), {n + 1, n, n});
    d["p"] = to_array(s.p.data(), {n, n, n});
    return d;
}

std::vector<double> as_vector(const py::array_t<double, py::array::c_style | py::array::forcecast>& a) {
    return {a.data(), a.data() + a.size()};
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Lid-driven cavity flow solver core";

    py::register_exception<DimensionError>(m, "DimensionError", PyExc_ValueError);
    py::register_exception<SolverBreakdown>(m, "SolverBreakdown", PyExc_RuntimeError);
    py::register_exception<SnapshotFormatError>(m, "SnapshotFormatError", PyExc_ValueError);

    py::class_<SimConfig>(m, "SimConfig")
        .def(py::init<>())
        .def_readwrite("n", &SimConfig::n)
        .def_readwrite("h", &SimConfig::h)
        .def_readwrite("dt", &SimConfig::dt)
        .def_readwrite("t_end", &SimConfig::t_end)
        .def_readwrite("lid_accel", &SimConfig::lid_accel)
        .def_readwrite("density", &SimConfig::density)
        .def_readwrite("tol", &SimConfig::tol)
        .def_readwrite("max_iter", &SimConfig::max_iter)
        .def_readwrite("warm_start", &SimConfig::warm_start)
        .def_readwrite("advection_tile", &SimConfig::advection_tile)
        .def_readwrite("record_divergence", &SimConfig::record_divergence)
        .def_readwrite("output_dir", &SimConfig::output_dir)
        .def_property(
            "preconditioner", [](const SimConfig& c) { return std::string(to_string(c.preconditioner)); },
            [](SimConfig& c, const std::string& s) { c.preconditioner = parse_preconditioner(s); })
        .def_property(
            "variant", [](const SimConfig& c) { return std::string(to_string(c.variant)); },
            [](SimConfig& c, const std::string& s) { c.variant = parse_variant(s); })
        .def_property(
            "pressure_bc", [](const SimConfig& c) { return std::string(to_string(c.pressure_bc)); },
            [](SimConfig& c, const std::string& s) { c.pressure_bc = parse_pressure_boundary(s); })
        .def("validate", &SimConfig::validate)
        .def("step_count", &SimConfig::step_count);

    py::class_<SolveStats>(m, "SolveStats")
        .def_readonly("iterations", &SolveStats::iterations)
        .def_readonly("final_residual_rel", &SolveStats::final_residual_rel)
        .def_readonly("converged", &SolveStats::converged);

    py::class_<StepRecord>(m, "StepRecord")
        .def_readonly("step", &StepRecord::step)
        .def_readonly("solve", &StepRecord::solve)
        .def_readonly("div_before", &StepRecord::div_before)
        .def_readonly("div_after", &StepRecord::div_after);

    py::class_<bench::RegionStats>(m, "RegionStats")
        .def_readonly("name", &bench::RegionStats::name)
        .def_readonly("parent", &bench::RegionStats::parent)
        .def_readonly("depth", &bench::RegionStats::depth)
        .def_readonly("calls", &bench::RegionStats::calls)
        .def_readonly("inclusive_seconds", &bench::RegionStats::inclusive_seconds)
        .def_readonly("fraction", &bench::RegionStats::fraction);

    py::class_<RunResult>(m, "RunResult")
        .def_property_readonly("step", [](const RunResult& r) { return r.state.step; })
        .def_property_readonly("t", [](const RunResult& r) { return r.state.t; })
        .def_property_readonly("fields", [](const RunResult& r) { return fields_of(r.state); })
        .def_readonly("history", &RunResult::history)
        .def_readonly("regions", &RunResult::regions)
        .def_readonly("snapshots_written", &RunResult::snapshots_written)
        .def("circulation", [](const RunResult& r) { return lid_circulation(r.state.vel); })
        .def("max_divergence", [](const RunResult& r) { return max_abs(divergence(r.state.vel)); });

    m.def(
        "run",
        [](const SimConfig& cfg, bool profile) {
            py::gil_scoped_release release;
            bench::Profiler profiler;
            return run(cfg, profile ? &profiler : nullptr);
        },
        py::arg("config"), py::arg("profile") = false, "Run the time loop and return the final state.");

    m.def(
        "laplacian",
        [](int n, double h, const std::string& bc) {
            const CsrMatrix a = assemble_laplacian(GridSpec(n, h), parse_pressure_boundary(bc));
            std::vector<std::int64_t> ptr(a.row_ptr.begin(), a.row_ptr.end());
            std::vector<std::int64_t> idx(a.col_idx.begin(), a.col_idx.end());
            return py::make_tuple(py::array(py::cast(a.values)), py::array(py::cast(idx)), py::array(py::cast(ptr)));
        },
        py::arg("n"), py::arg("h") = 1.0, py::arg("pressure_bc") = "zero-gradient",
        "Pressure operator as CSR (data, indices, indptr).");

    m.def(
        "solve_pressure",
        [](int n, double h, const std::string& bc, const py::array_t<double, py::array::c_style | py::array::forcecast>& b,
           const std::string& preconditioner, double tol, int max_iter) {
            const SymCsrMatrix a = assemble_laplacian_symmetric(GridSpec(n, h), parse_pressure_boundary(bc));
            const auto rhs = as_vector(b);
            const auto precond = Preconditioner::make(parse_preconditioner(preconditioner), a);
            SolveResult res;
            {
                py::gil_scoped_release release;
                res = pcg(as_operator(a), rhs, std::vector<double>(rhs.size(), 0.0), precond, {tol, max_iter});
            }
            return py::make_tuple(py::array(py::cast(res.x)), res.stats);
        },
        py::arg("n"), py::arg("h"), py::arg("pressure_bc"), py::arg("b"), py::arg("preconditioner") = "dic",
        py::arg("tol") = 1e-6, py::arg("max_iter") = 1000, "PCG solve of the pressure operator.");

    m.def(
        "read_snapshot",
        [](const std::filesystem::path& path) {
            const Snapshot s = read_snapshot(path);
            py::array_t<double> rows({static_cast<py::ssize_t>(s.rows.size()), py::ssize_t{7}});
            auto view = rows.mutable_unchecked<2>();
            for (std::size_t r = 0; r < s.rows.size(); ++r) {
                const auto& row = s.rows[r];
                const double vals[7] = {row.x, row.y, row.z, row.u, row.v, row.w, row.p};
                for (py::ssize_t c = 0; c < 7; ++c) view(static_cast<py::ssize_t>(r), c) = vals[c];
            }
            return py::make_tuple(s.spec.n, s.spec.h, rows);
        },
        py::arg("path"), "Returns (n, h, rows) with rows of x,y,z,u,v,w,p.");

    m.def(
        "compare_snapshots",
        [](const std::filesystem::path& a, const std::filesystem::path& b, double abs_tol) {
            const auto cmp = compare_snapshots(read_snapshot(a), read_snapshot(b), abs_tol);
            py::dict diffs;
            for (std::size_t c = 0; c < Snapshot::column_count; ++c)
                diffs[py::str(std::string(Snapshot::column_names[c]))] = cmp.max_abs_diff[c];
            py::dict out;
            out["pass"] = cmp.pass;
            out["max_abs_diff"] = diffs;
            out["failing_columns"] = cmp.failing_columns;
            return out;
        },
        py::arg("a"), py::arg("b"), py::arg("abs_tol"));

    m.def(
        "scaling_sweep",
        [](const SimConfig& cfg, const std::vector<int>& threads) {
            std::vector<bench::ScalingRow> rows;
            {
                py::gil_scoped_release release;
                rows = bench::scaling_sweep(cfg, threads);
            }
            py::list out;
            for (const auto& r : rows) out.append(py::make_tuple(r.threads, r.region, r.seconds));
            return out;
        },
        py::arg("config"), py::arg("threads"), "List of (threads, region, seconds).");

    m.def("set_thread_count", &set_thread_count, py::arg("threads"));
    m.def("thread_count", &thread_count);
}
