#include "fcs/config.hpp"

#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>

#include "fcs/io.hpp"

namespace fcs {

namespace {

[[noreturn]] void fail(int line, const std::string& message) {
    throw std::runtime_error("config line " + std::to_string(line) + ": " + message);
}

std::string trim(const std::string& s) {
    const auto a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return {};
    const auto b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
}

double to_double(const std::string& s, int line) {
    try {
        std::size_t used = 0;
        const double v = std::stod(s, &used);
        if (used != s.size()) fail(line, "trailing characters in number '" + s + "'");
        return v;
    } catch (const std::invalid_argument&) {
        fail(line, "expected a number, got '" + s + "'");
    } catch (const std::out_of_range&) {
        fail(line, "number out of range: '" + s + "'");
    }
}

long long to_int(const std::string& s, int line) {
    try {
        std::size_t used = 0;
        const long long v = std::stoll(s, &used);
        if (used != s.size()) fail(line, "trailing characters in integer '" + s + "'");
        return v;
    } catch (const std::exception&) {
        fail(line, "expected an integer, got '" + s + "'");
    }
}

bool to_bool(const std::string& s, int line) {
    if (s == "true" || s == "1" || s == "yes") return true;
    if (s == "false" || s == "0" || s == "no") return false;
    fail(line, "expected a boolean, got '" + s + "'");
}

std::vector<std::string> split_ws(const std::string& s) {
    std::vector<std::string> parts;
    std::istringstream in(s);
    std::string tok;
    while (in >> tok) parts.push_back(tok);
    return parts;
}

Vec3 to_vec(const std::string& s, int line, int want) {
    const auto parts = split_ws(s);
    if (static_cast<int>(parts.size()) != want)
        fail(line, "expected " + std::to_string(want) + " numbers");
    Vec3 v{0.0, 0.0, 0.0};
    for (int i = 0; i < want; ++i) v[i] = to_double(parts[i], line);
    return v;
}

std::string format_double(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

std::string format_vec(const Vec3& v, int dim) {
    std::string s;
    for (int i = 0; i < dim; ++i) {
        if (i) s += ' ';
        s += format_double(v[i]);
    }
    return s;
}

// functional expression syntax: name(arg, arg, ...) with nested calls
struct ExprParser {
    const std::string& text;
    std::size_t pos = 0;

    void skip_ws() {
        while (pos < text.size() && std::isspace(static_cast<unsigned char>(text[pos]))) ++pos;
    }
    bool consume(char c) {
        skip_ws();
        if (pos < text.size() && text[pos] == c) {
            ++pos;
            return true;
        }
        return false;
    }
    std::string ident() {
        skip_ws();
        std::size_t start = pos;
        while (pos < text.size() &&
               (std::isalnum(static_cast<unsigned char>(text[pos])) || text[pos] == '_'))
            ++pos;
        return text.substr(start, pos - start);
    }
    std::string raw_arg() {  // up to , or ) at depth 0
        skip_ws();
        std::size_t start = pos;
        int depth = 0;
        while (pos < text.size()) {
            const char c = text[pos];
            if (c == '(') ++depth;
            if (c == ')' && depth-- == 0) break;
            if (c == ',' && depth == 0) break;
            ++pos;
        }
        return trim(text.substr(start, pos - start));
    }
};

struct Call {
    std::string name;
    std::vector<std::string> args;
};

Call parse_call(ExprParser& p) {
    Call c;
    c.name = p.ident();
    if (c.name.empty()) throw std::runtime_error("expected an identifier in expression");
    if (!p.consume('(')) return c;  // bare identifier
    if (p.consume(')')) return c;
    while (true) {
        c.args.push_back(p.raw_arg());
        if (p.consume(',')) continue;
        if (p.consume(')')) break;
        throw std::runtime_error("unbalanced parentheses in expression");
    }
    return c;
}

double arg_num(const Call& c, std::size_t i) {
    if (i >= c.args.size())
        throw std::runtime_error(c.name + ": missing argument " + std::to_string(i + 1));
    std::size_t used = 0;
    const double v = std::stod(c.args[i], &used);
    if (used != c.args[i].size())
        throw std::runtime_error(c.name + ": bad numeric argument '" + c.args[i] + "'");
    return v;
}

void want_args(const Call& c, std::size_t n) {
    if (c.args.size() != n)
        throw std::runtime_error(c.name + ": expected " + std::to_string(n) + " arguments");
}

}  // namespace

Shape parse_shape(const std::string& expr, int dim, const Box& box) {
    ExprParser p{expr};
    const Call c = parse_call(p);

    if (c.name == "all") return Shape::all();
    if (c.name == "empty") return Shape::empty();
    if (c.name == "halfspace") {
        want_args(c, 3);
        const int axis = static_cast<int>(arg_num(c, 0));
        if (axis < 0 || axis >= dim) throw std::runtime_error("halfspace: axis out of range");
        return Shape::half_space(axis, arg_num(c, 1), arg_num(c, 2) < 0.0);
    }
    if (c.name == "ball") {
        want_args(c, 4);
        return Shape::ball({arg_num(c, 0), arg_num(c, 1), arg_num(c, 2)}, arg_num(c, 3));
    }
    if (c.name == "box") {
        want_args(c, 6);
        Box b;
        for (int i = 0; i < 3; ++i) {
            b.lo[i] = arg_num(c, i);
            b.hi[i] = arg_num(c, 3 + i);
        }
        return Shape::axis_box(b);
    }
    if (c.name == "complement") {
        want_args(c, 1);
        return Shape::complement(parse_shape(c.args[0], dim, box));
    }
    if (c.name == "intersect" || c.name == "union") {
        std::vector<Shape> parts;
        for (const std::string& a : c.args) parts.push_back(parse_shape(a, dim, box));
        if (parts.empty()) throw std::runtime_error(c.name + ": needs at least one operand");
        return c.name == "intersect" ? Shape::intersection(std::move(parts))
                                     : Shape::union_of(std::move(parts));
    }
    if (c.name == "pores") {
        want_args(c, 4);
        return make_pore_body(box, static_cast<std::uint64_t>(arg_num(c, 0)),
                              static_cast<int>(arg_num(c, 1)), arg_num(c, 2), arg_num(c, 3));
    }
    if (c.name == "voxels") {
        want_args(c, 1);
        auto grid = read_voxels(c.args[0]);
        grid->box = box;
        return Shape::voxel_grid(std::move(grid));
    }
    throw std::runtime_error("unknown shape '" + c.name + "'");
}

RegionPredicate parse_region(const std::string& expr, int dim) {
    ExprParser p{expr};
    const Call c = parse_call(p);
    if (c.name == "none") return region_none();
    if (c.name == "point") {
        want_args(c, 3);
        return region_point({arg_num(c, 0), arg_num(c, 1), arg_num(c, 2)}, dim);
    }
    if (c.name == "box") {
        want_args(c, 6);
        Box b;
        for (int i = 0; i < 3; ++i) {
            b.lo[i] = arg_num(c, i);
            b.hi[i] = arg_num(c, 3 + i);
        }
        return region_box(b, dim);
    }
    if (c.name == "sphere_shell") {
        want_args(c, 4);
        return region_sphere_shell({arg_num(c, 0), arg_num(c, 1), arg_num(c, 2)},
                                   arg_num(c, 3), dim);
    }
    throw std::runtime_error("unknown refinement region '" + c.name + "'");
}

namespace {

SurfacePatch parse_patch(const std::string& expr, int line) {
    ExprParser p{expr};
    Call c;
    try {
        c = parse_call(p);
    } catch (const std::exception& e) {
        fail(line, e.what());
    }
    SurfacePatch patch;
    try {
        if (c.name == "axisplane") {
            // axisplane(axis, pos, lo0,lo1,lo2, hi0,hi1,hi2, sign)
            want_args(c, 9);
            patch.kind = SurfacePatch::Kind::AxisPlane;
            patch.axis = static_cast<int>(arg_num(c, 0));
            patch.pos = arg_num(c, 1);
            for (int i = 0; i < 3; ++i) {
                patch.bounds.lo[i] = arg_num(c, 2 + i);
                patch.bounds.hi[i] = arg_num(c, 5 + i);
            }
            patch.bounds.lo[patch.axis] = patch.pos;
            patch.bounds.hi[patch.axis] = patch.pos;
            patch.normal_sign = arg_num(c, 8) < 0.0 ? -1.0 : 1.0;
        } else if (c.name == "sphere_patch") {
            // sphere_patch(cx,cy,cz, r, theta0,theta1, phi0,phi1, sign)
            want_args(c, 9);
            patch.kind = SurfacePatch::Kind::Sphere;
            patch.center = {arg_num(c, 0), arg_num(c, 1), arg_num(c, 2)};
            patch.radius = arg_num(c, 3);
            patch.theta0 = arg_num(c, 4);
            patch.theta1 = arg_num(c, 5);
            patch.phi0 = arg_num(c, 6);
            patch.phi1 = arg_num(c, 7);
            patch.normal_sign = arg_num(c, 8) < 0.0 ? -1.0 : 1.0;
        } else if (c.name == "point_patch") {
            want_args(c, 2);
            patch.kind = SurfacePatch::Kind::Point;
            patch.pos = arg_num(c, 0);
            patch.normal_sign = arg_num(c, 1) < 0.0 ? -1.0 : 1.0;
        } else {
            fail(line, "unknown patch kind '" + c.name + "'");
        }
    } catch (const std::runtime_error&) {
        throw;
    }
    return patch;
}

std::string patch_to_string(const SurfacePatch& p) {
    std::string s;
    switch (p.kind) {
        case SurfacePatch::Kind::AxisPlane:
            s = "axisplane(" + std::to_string(p.axis) + ", " + format_double(p.pos);
            for (int i = 0; i < 3; ++i) s += ", " + format_double(p.bounds.lo[i]);
            for (int i = 0; i < 3; ++i) s += ", " + format_double(p.bounds.hi[i]);
            s += ", " + format_double(p.normal_sign) + ")";
            return s;
        case SurfacePatch::Kind::Sphere:
            s = "sphere_patch(";
            for (int i = 0; i < 3; ++i) s += format_double(p.center[i]) + ", ";
            s += format_double(p.radius) + ", " + format_double(p.theta0) + ", " +
                 format_double(p.theta1) + ", " + format_double(p.phi0) + ", " +
                 format_double(p.phi1) + ", " + format_double(p.normal_sign) + ")";
            return s;
        case SurfacePatch::Kind::Point:
            return "point_patch(" + format_double(p.pos) + ", " + format_double(p.normal_sign) +
                   ")";
    }
    return s;
}

unsigned parse_components(const std::string& s, int line, PenaltyMode& mode) {
    if (s == "normal" || s == "n") {
        mode = PenaltyMode::NormalOnly;
        return ~0u;
    }
    mode = PenaltyMode::Components;
    if (s == "all") return ~0u;
    unsigned mask = 0;
    for (char c : s) {
        if (c == 'x')
            mask |= 1u;
        else if (c == 'y')
            mask |= 2u;
        else if (c == 'z')
            mask |= 4u;
        else
            fail(line, "bad components spec '" + s + "'");
    }
    return mask;
}

std::string components_to_string(PenaltyMode mode, unsigned mask) {
    if (mode == PenaltyMode::NormalOnly) return "normal";
    if ((mask & 7u) == 7u) return "all";
    std::string s;
    if (mask & 1u) s += 'x';
    if (mask & 2u) s += 'y';
    if (mask & 4u) s += 'z';
    return s.empty() ? "all" : s;
}

}  // namespace

RunConfig parse_config(const std::string& text) {
    RunConfig cfg;
    std::map<std::string, int> surface_index;  // section name -> surfaces[] slot

    std::istringstream in(text);
    std::string raw;
    std::string section;
    int line_no = 0;
    bool saw_problem = false, saw_mesh = false;

    while (std::getline(in, raw)) {
        ++line_no;
        std::string line = raw;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;

        if (line.front() == '[') {
            if (line.back() != ']') fail(line_no, "malformed section header");
            section = trim(line.substr(1, line.size() - 2));
            if (section == "problem") saw_problem = true;
            if (section == "mesh") saw_mesh = true;
            if (section.rfind("surface.", 0) == 0 && !surface_index.count(section)) {
                surface_index[section] = static_cast<int>(cfg.surfaces.size());
                cfg.surfaces.push_back({});
            }
            continue;
        }

        const auto eq = line.find('=');
        if (eq == std::string::npos) fail(line_no, "expected 'key = value'");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty() || value.empty()) fail(line_no, "empty key or value");

        if (section == "problem") {
            if (key == "kind") {
                if (value == "poisson")
                    cfg.kind = ModelProblem::Kind::Poisson;
                else if (value == "elasticity")
                    cfg.kind = ModelProblem::Kind::LinearElasticity;
                else
                    fail(line_no, "unknown problem kind '" + value + "'");
            } else if (key == "conductivity") {
                cfg.conductivity = to_double(value, line_no);
                if (cfg.conductivity <= 0.0) fail(line_no, "conductivity must be positive");
            } else if (key == "youngs_modulus") {
                cfg.youngs_modulus = to_double(value, line_no);
                if (cfg.youngs_modulus <= 0.0) fail(line_no, "youngs_modulus must be positive");
            } else if (key == "poisson_ratio") {
                cfg.poisson_ratio = to_double(value, line_no);
                if (cfg.poisson_ratio <= -1.0 || cfg.poisson_ratio >= 0.5)
                    fail(line_no, "poisson_ratio must be in (-1, 0.5)");
            } else if (key == "body_load") {
                const auto parts = split_ws(value);
                if (parts.size() > 3) fail(line_no, "body_load takes at most 3 numbers");
                for (std::size_t i = 0; i < parts.size(); ++i)
                    cfg.body_load[i] = to_double(parts[i], line_no);
            } else {
                fail(line_no, "unknown key '" + key + "' in [problem]");
            }
        } else if (section == "geometry") {
            if (key == "domain")
                cfg.domain_expr = value;
            else
                fail(line_no, "unknown key '" + key + "' in [geometry]");
        } else if (section == "mesh") {
            if (key == "dim") {
                cfg.dim = static_cast<int>(to_int(value, line_no));
                if (cfg.dim < 1 || cfg.dim > 3) fail(line_no, "dim must be 1, 2 or 3");
            } else if (key == "lo") {
                cfg.lo = to_vec(value, line_no, cfg.dim);
            } else if (key == "hi") {
                cfg.hi = to_vec(value, line_no, cfg.dim);
            } else if (key == "counts") {
                const auto parts = split_ws(value);
                if (static_cast<int>(parts.size()) != cfg.dim)
                    fail(line_no, "counts needs one entry per dimension");
                for (int i = 0; i < cfg.dim; ++i) {
                    cfg.counts[i] = to_int(parts[i], line_no);
                    if (cfg.counts[i] < 1) fail(line_no, "counts must be positive");
                }
            } else if (key == "refine_region") {
                cfg.refine_expr = value;
            } else if (key == "refine_depth") {
                cfg.refine_depth = static_cast<int>(to_int(value, line_no));
                if (cfg.refine_depth < 0) fail(line_no, "refine_depth must be >= 0");
            } else {
                fail(line_no, "unknown key '" + key + "' in [mesh]");
            }
        } else if (section == "discretization") {
            if (key == "p") {
                cfg.p = static_cast<int>(to_int(value, line_no));
                if (cfg.p < 1) fail(line_no, "p must be >= 1");
            } else if (key == "alpha") {
                cfg.alpha = to_double(value, line_no);
                if (cfg.alpha < 0.0 || cfg.alpha >= 1.0)
                    fail(line_no, "alpha must be in [0, 1)");
            } else if (key == "tree_depth") {
                cfg.quad.tree_depth = static_cast<int>(to_int(value, line_no));
                if (cfg.quad.tree_depth < 0) fail(line_no, "tree_depth must be >= 0");
            } else if (key == "volume_order") {
                cfg.quad.volume_order = static_cast<int>(to_int(value, line_no));
            } else if (key == "surface_order") {
                cfg.quad.surface_order = static_cast<int>(to_int(value, line_no));
            } else if (key == "classify_depth") {
                cfg.quad.classify_depth = static_cast<int>(to_int(value, line_no));
            } else if (key == "eta_depth") {
                cfg.quad.eta_depth = static_cast<int>(to_int(value, line_no));
            } else if (key == "remove_outside") {
                cfg.remove_outside = to_bool(value, line_no);
            } else {
                fail(line_no, "unknown key '" + key + "' in [discretization]");
            }
        } else if (section.rfind("surface.", 0) == 0) {
            SurfaceConfig& s = cfg.surfaces[surface_index[section]];
            if (key == "type") {
                if (value == "dirichlet")
                    s.dirichlet = true;
                else if (value == "neumann")
                    s.dirichlet = false;
                else
                    fail(line_no, "surface type must be dirichlet or neumann");
            } else if (key == "patch") {
                s.patch = parse_patch(value, line_no);
            } else if (key == "value") {
                const auto parts = split_ws(value);
                if (parts.size() > 3) fail(line_no, "value takes at most 3 numbers");
                for (std::size_t i = 0; i < parts.size(); ++i)
                    s.value[i] = to_double(parts[i], line_no);
            } else if (key == "beta") {
                s.beta = to_double(value, line_no);
                if (s.beta <= 0.0) fail(line_no, "beta must be positive");
            } else if (key == "components") {
                s.component_mask = parse_components(value, line_no, s.mode);
            } else {
                fail(line_no, "unknown key '" + key + "' in [" + section + "]");
            }
        } else if (section == "preconditioner") {
            if (key == "kind") {
                if (value == "none")
                    cfg.precond = PreconditionerKind::None;
                else if (value == "jacobi")
                    cfg.precond = PreconditionerKind::Jacobi;
                else if (value == "full_blocks")
                    cfg.precond = PreconditionerKind::FullBlocks;
                else if (value == "truncated_blocks")
                    cfg.precond = PreconditionerKind::TruncatedBlocks;
                else
                    fail(line_no, "unknown preconditioner kind '" + value + "'");
            } else if (key == "eta_bar") {
                cfg.eta_bar = to_double(value, line_no);
                if (cfg.eta_bar < 0.0 || cfg.eta_bar > 1.0)
                    fail(line_no, "eta_bar must be in [0, 1]");
            } else if (key == "epsilon") {
                cfg.epsilon = to_double(value, line_no);
                if (cfg.epsilon < 0.0 || cfg.epsilon >= 1.0)
                    fail(line_no, "epsilon must be in [0, 1)");
            } else if (key == "stabilized") {
                cfg.stabilized = to_bool(value, line_no);
            } else if (key == "include_interior") {
                cfg.include_interior = to_bool(value, line_no);
            } else {
                fail(line_no, "unknown key '" + key + "' in [preconditioner]");
            }
        } else if (section == "solver") {
            if (key == "tol") {
                cfg.tol = to_double(value, line_no);
                if (cfg.tol <= 0.0) fail(line_no, "tol must be positive");
            } else if (key == "max_iter") {
                cfg.max_iter = static_cast<int>(to_int(value, line_no));
                if (cfg.max_iter < 1) fail(line_no, "max_iter must be >= 1");
            } else if (key == "reference") {
                cfg.reference = to_bool(value, line_no);
            } else {
                fail(line_no, "unknown key '" + key + "' in [solver]");
            }
        } else if (section == "partition") {
            if (key == "n_ranks") {
                cfg.n_ranks = static_cast<int>(to_int(value, line_no));
                if (cfg.n_ranks < 1) fail(line_no, "n_ranks must be >= 1");
            } else if (key == "strategy") {
                if (value == "slab")
                    cfg.strategy = PartitionStrategy::Slab;
                else if (value == "sfc")
                    cfg.strategy = PartitionStrategy::SpaceFillingCurve;
                else
                    fail(line_no, "strategy must be slab or sfc");
            } else {
                fail(line_no, "unknown key '" + key + "' in [partition]");
            }
        } else if (section == "output") {
            if (key == "dir")
                cfg.out_dir = value;
            else if (key == "write_matrix")
                cfg.write_matrix = to_bool(value, line_no);
            else if (key == "write_vtk")
                cfg.write_vtk = to_bool(value, line_no);
            else if (key == "write_blocks")
                cfg.write_blocks = to_bool(value, line_no);
            else
                fail(line_no, "unknown key '" + key + "' in [output]");
        } else if (section.empty()) {
            fail(line_no, "key outside of any section");
        } else {
            fail(line_no, "unknown section [" + section + "]");
        }
    }

    if (!saw_problem) throw std::runtime_error("config: missing required section [problem]");
    if (!saw_mesh) throw std::runtime_error("config: missing required section [mesh]");
    for (int i = 0; i < cfg.dim; ++i)
        if (!(cfg.hi[i] > cfg.lo[i]))
            throw std::runtime_error("config: mesh extents are degenerate");

    // validate the expressions now so errors surface at parse time
    Box box{cfg.lo, cfg.hi};
    parse_shape(cfg.domain_expr, cfg.dim, box);
    parse_region(cfg.refine_expr, cfg.dim);
    return cfg;
}

RunConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_config(buf.str());
}

std::string serialize_config(const RunConfig& c) {
    std::ostringstream out;
    out << "[problem]\n";
    out << "kind = " << (c.kind == ModelProblem::Kind::Poisson ? "poisson" : "elasticity")
        << "\n";
    out << "conductivity = " << format_double(c.conductivity) << "\n";
    out << "youngs_modulus = " << format_double(c.youngs_modulus) << "\n";
    out << "poisson_ratio = " << format_double(c.poisson_ratio) << "\n";
    out << "body_load = " << format_vec(c.body_load, 3) << "\n";

    out << "\n[geometry]\n";
    out << "domain = " << c.domain_expr << "\n";

    out << "\n[mesh]\n";
    out << "dim = " << c.dim << "\n";
    out << "lo = " << format_vec(c.lo, c.dim) << "\n";
    out << "hi = " << format_vec(c.hi, c.dim) << "\n";
    out << "counts =";
    for (int i = 0; i < c.dim; ++i) out << ' ' << c.counts[i];
    out << "\n";
    out << "refine_region = " << c.refine_expr << "\n";
    out << "refine_depth = " << c.refine_depth << "\n";

    out << "\n[discretization]\n";
    out << "p = " << c.p << "\n";
    out << "alpha = " << format_double(c.alpha) << "\n";
    out << "tree_depth = " << c.quad.tree_depth << "\n";
    out << "volume_order = " << c.quad.volume_order << "\n";
    out << "surface_order = " << c.quad.surface_order << "\n";
    out << "classify_depth = " << c.quad.classify_depth << "\n";
    out << "eta_depth = " << c.quad.eta_depth << "\n";
    out << "remove_outside = " << (c.remove_outside ? "true" : "false") << "\n";

    for (std::size_t i = 0; i < c.surfaces.size(); ++i) {
        const SurfaceConfig& s = c.surfaces[i];
        out << "\n[surface." << i << "]\n";
        out << "type = " << (s.dirichlet ? "dirichlet" : "neumann") << "\n";
        out << "patch = " << patch_to_string(s.patch) << "\n";
        out << "value = " << format_vec(s.value, 3) << "\n";
        if (s.dirichlet) {
            out << "beta = " << format_double(s.beta) << "\n";
            out << "components = " << components_to_string(s.mode, s.component_mask) << "\n";
        }
    }

    out << "\n[preconditioner]\n";
    const char* pk = "truncated_blocks";
    if (c.precond == PreconditionerKind::None) pk = "none";
    if (c.precond == PreconditionerKind::Jacobi) pk = "jacobi";
    if (c.precond == PreconditionerKind::FullBlocks) pk = "full_blocks";
    out << "kind = " << pk << "\n";
    out << "eta_bar = " << format_double(c.eta_bar) << "\n";
    out << "epsilon = " << format_double(c.epsilon) << "\n";
    out << "stabilized = " << (c.stabilized ? "true" : "false") << "\n";
    out << "include_interior = " << (c.include_interior ? "true" : "false") << "\n";

    out << "\n[solver]\n";
    out << "tol = " << format_double(c.tol) << "\n";
    out << "max_iter = " << c.max_iter << "\n";
    out << "reference = " << (c.reference ? "true" : "false") << "\n";

    out << "\n[partition]\n";
    out << "n_ranks = " << c.n_ranks << "\n";
    out << "strategy = " << (c.strategy == PartitionStrategy::Slab ? "slab" : "sfc") << "\n";

    out << "\n[output]\n";
    out << "dir = " << c.out_dir << "\n";
    out << "write_matrix = " << (c.write_matrix ? "true" : "false") << "\n";
    out << "write_vtk = " << (c.write_vtk ? "true" : "false") << "\n";
    out << "write_blocks = " << (c.write_blocks ? "true" : "false") << "\n";
    return out.str();
}

ModelProblem RunConfig::model() const {
    ModelProblem m;
    m.kind = kind;
    m.conductivity = conductivity;
    m.youngs_modulus = youngs_modulus;
    m.poisson_ratio = poisson_ratio;
    m.body_load = body_load;
    return m;
}

ImplicitDomain RunConfig::build_domain() const {
    ImplicitDomain d;
    d.dim = dim;
    d.shape = parse_shape(domain_expr, dim, Box{lo, hi});
    d.alpha_fict = alpha;
    for (const SurfaceConfig& s : surfaces) {
        if (s.dirichlet) {
            DirichletSurface ds;
            ds.patch = s.patch;
            ds.value = s.value;
            ds.beta = s.beta;
            ds.mode = s.mode;
            ds.component_mask = s.component_mask;
            d.dirichlet.push_back(ds);
        } else {
            NeumannSurface ns;
            ns.patch = s.patch;
            ns.traction = s.value;
            d.neumann.push_back(ns);
        }
    }
    return d;
}

MlhpMesh RunConfig::build_mesh() const {
    MlhpMesh mesh = build_base_mesh(Box{lo, hi}, counts, dim);
    if (refine_depth > 0) mesh.refine_toward(parse_region(refine_expr, dim), refine_depth);
    mesh.classify(build_domain(), quad.classify_depth);
    return mesh;
}

}  // namespace fcs
