#include "splathand/io.hpp"

#include <cmath>
#include <cstring>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

#include <json.hpp>

#include "splathand/errors.hpp"

namespace splathand {

using nlohmann::json;

namespace {

constexpr double kShDc = 0.2820948;

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

json parse_json_file(const std::string& path) {
    try {
        return json::parse(read_file(path));
    } catch (const json::parse_error& e) {
        throw FormatError(path + ": " + e.what());
    }
}

Vec3 vec3_from_json(const json& j, const std::string& what) {
    if (!j.is_array() || j.size() != 3) throw FormatError(what + " must be a 3-array");
    return Vec3(j[0].get<double>(), j[1].get<double>(), j[2].get<double>());
}

json vec3_to_json(const Vec3& v) { return json::array({v.x(), v.y(), v.z()}); }

Mat3 mat3_from_json(const json& j, const std::string& what) {
    if (!j.is_array() || j.size() != 9) throw FormatError(what + " must be a row-major 9-array");
    Mat3 m;
    for (int r = 0; r < 3; ++r) {
        for (int c = 0; c < 3; ++c) m(r, c) = j[static_cast<size_t>(3 * r + c)].get<double>();
    }
    return m;
}

json mat3_to_json(const Mat3& m) {
    json j = json::array();
    for (int r = 0; r < 3; ++r) {
        for (int c = 0; c < 3; ++c) j.push_back(m(r, c));
    }
    return j;
}

Mat3 load_rotation_checked(const json& j, const std::string& what) {
    const Mat3 raw = mat3_from_json(j, what);
    if (!is_rotation(raw, 1e-4)) {
        throw ValidationError(what + " is not a rotation matrix within tolerance 1e-4");
    }
    return orthonormalize(raw);
}

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

double logit(double p) {
    const double clamped = std::clamp(p, 1e-6, 1.0 - 1e-6);
    return std::log(clamped / (1.0 - clamped));
}

int ply_type_size(const std::string& type) {
    static const std::map<std::string, int> sizes = {
        {"char", 1},  {"int8", 1},   {"uchar", 1},  {"uint8", 1},  {"short", 2},
        {"int16", 2}, {"ushort", 2}, {"uint16", 2}, {"int", 4},    {"int32", 4},
        {"uint", 4},  {"uint32", 4}, {"float", 4},  {"float32", 4}, {"double", 8},
        {"float64", 8}};
    const auto it = sizes.find(type);
    if (it == sizes.end()) throw FormatError("unsupported PLY property type: " + type);
    return it->second;
}

const std::array<const char*, 14> kPlyProps = {"x",       "y",       "z",       "f_dc_0",
                                               "f_dc_1",  "f_dc_2",  "opacity", "scale_0",
                                               "scale_1", "scale_2", "rot_0",   "rot_1",
                                               "rot_2",   "rot_3"};

template <typename T>
void write_raw(std::ostream& out, T value) {
    out.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <typename T>
T read_raw(std::istream& in, const std::string& what) {
    T value{};
    if (!in.read(reinterpret_cast<char*>(&value), sizeof(T))) {
        throw FormatError("truncated data while reading " + what);
    }
    return value;
}

}  // namespace

GaussianSet load_gaussian_ply(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path);

    std::string line;
    if (!std::getline(in, line) || line != "ply") throw FormatError(path + ": not a PLY file");
    if (!std::getline(in, line) || line != "format binary_little_endian 1.0") {
        throw FormatError(path + ": only binary little-endian PLY is supported");
    }

    long vertex_count = -1;
    std::vector<std::pair<std::string, int>> props;  // name, byte size
    bool in_vertex_element = false;
    while (std::getline(in, line)) {
        if (line == "end_header") break;
        std::istringstream ls(line);
        std::string token;
        ls >> token;
        if (token == "comment") continue;
        if (token == "element") {
            std::string name;
            long count = 0;
            ls >> name >> count;
            if (name == "vertex") {
                if (vertex_count >= 0) throw FormatError(path + ": duplicate vertex element");
                vertex_count = count;
                in_vertex_element = true;
            } else {
                if (vertex_count < 0) {
                    throw FormatError(path + ": vertex must be the first element");
                }
                in_vertex_element = false;
            }
        } else if (token == "property" && in_vertex_element) {
            std::string type, name;
            ls >> type;
            if (type == "list") throw FormatError(path + ": list properties are unsupported");
            ls >> name;
            props.emplace_back(name, ply_type_size(type));
        }
    }
    if (vertex_count < 0) throw FormatError(path + ": missing vertex element");

    // byte offset of each required float property within a record
    std::map<std::string, int> offsets;
    int record_size = 0;
    for (const auto& [name, size] : props) {
        offsets.emplace(name, record_size);
        record_size += size;
    }
    for (const char* name : kPlyProps) {
        if (!offsets.count(name)) {
            throw FormatError(path + ": missing required property " + name);
        }
    }

    GaussianSet set;
    std::vector<char> record(static_cast<size_t>(record_size));
    auto field = [&](const char* name) {
        float v;
        std::memcpy(&v, record.data() + offsets.at(name), sizeof(float));
        return static_cast<double>(v);
    };
    for (long i = 0; i < vertex_count; ++i) {
        if (!in.read(record.data(), record_size)) {
            throw FormatError(path + ": truncated vertex data at element " + std::to_string(i));
        }
        double values[14];
        for (size_t p = 0; p < kPlyProps.size(); ++p) values[p] = field(kPlyProps[p]);
        for (double v : values) {
            if (!std::isfinite(v)) {
                throw FormatError(path + ": non-finite value at element " + std::to_string(i));
            }
        }
        set.positions.emplace_back(values[0], values[1], values[2]);
        Vec3 color = Vec3(values[3], values[4], values[5]) * kShDc + Vec3::Constant(0.5);
        set.colors.push_back(color.cwiseMax(0.0).cwiseMin(1.0));
        set.opacities.push_back(sigmoid(values[6]));
        set.scales.emplace_back(std::exp(values[7]), std::exp(values[8]), std::exp(values[9]));
        Quat q(values[10], values[11], values[12], values[13]);
        if (q.norm() < 1e-12) {
            throw FormatError(path + ": zero quaternion at element " + std::to_string(i));
        }
        q.normalize();
        set.orientations.push_back(q);
    }
    return set;
}

void save_gaussian_ply(const GaussianSet& set, const std::string& path) {
    set.validate();
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path);
    out << "ply\nformat binary_little_endian 1.0\nelement vertex " << set.size() << "\n";
    for (const char* name : kPlyProps) out << "property float " << name << "\n";
    out << "end_header\n";
    for (int i = 0; i < set.size(); ++i) {
        const size_t ui = static_cast<size_t>(i);
        const Vec3 f_dc = (set.colors[ui] - Vec3::Constant(0.5)) / kShDc;
        const float values[14] = {
            static_cast<float>(set.positions[ui].x()), static_cast<float>(set.positions[ui].y()),
            static_cast<float>(set.positions[ui].z()), static_cast<float>(f_dc.x()),
            static_cast<float>(f_dc.y()),              static_cast<float>(f_dc.z()),
            static_cast<float>(logit(set.opacities[ui])),
            static_cast<float>(std::log(set.scales[ui].x())),
            static_cast<float>(std::log(set.scales[ui].y())),
            static_cast<float>(std::log(set.scales[ui].z())),
            static_cast<float>(set.orientations[ui].w()),
            static_cast<float>(set.orientations[ui].x()),
            static_cast<float>(set.orientations[ui].y()),
            static_cast<float>(set.orientations[ui].z())};
        out.write(reinterpret_cast<const char*>(values), sizeof(values));
    }
    if (!out) throw IoError("failed writing " + path);
}

namespace {

std::string sibling_path(const std::string& base_file, const std::string& rel) {
    if (!rel.empty() && rel.front() == '/') return rel;
    const auto slash = base_file.find_last_of('/');
    if (slash == std::string::npos) return rel;
    return base_file.substr(0, slash + 1) + rel;
}

}  // namespace

TriangleMesh load_obj(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path);
    TriangleMesh mesh;
    std::string line;
    while (std::getline(in, line)) {
        std::istringstream ls(line);
        std::string token;
        ls >> token;
        if (token == "v") {
            double x, y, z;
            if (!(ls >> x >> y >> z)) throw FormatError(path + ": malformed vertex line");
            mesh.vertices.emplace_back(x, y, z);
        } else if (token == "f") {
            std::array<int, 3> face{};
            for (int k = 0; k < 3; ++k) {
                std::string ref;
                if (!(ls >> ref)) throw FormatError(path + ": face needs three vertices");
                face[static_cast<size_t>(k)] = std::stoi(ref.substr(0, ref.find('/'))) - 1;
            }
            std::string extra;
            if (ls >> extra) throw FormatError(path + ": only triangle faces are supported");
            mesh.faces.push_back(face);
        }
    }
    for (const auto& f : mesh.faces) {
        for (int idx : f) {
            if (idx < 0 || idx >= static_cast<int>(mesh.vertices.size())) {
                throw FormatError(path + ": face index out of range");
            }
        }
    }
    return mesh;
}

void save_obj(const TriangleMesh& mesh, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path);
    out.precision(17);
    for (const Vec3& v : mesh.vertices) out << "v " << v.x() << " " << v.y() << " " << v.z() << "\n";
    for (const auto& f : mesh.faces) {
        out << "f " << f[0] + 1 << " " << f[1] + 1 << " " << f[2] + 1 << "\n";
    }
}

HandRig load_rig(const std::string& path) {
    const json doc = parse_json_file(path);
    HandRig rig;

    if (doc.contains("mesh_obj")) {
        const TriangleMesh mesh = load_obj(sibling_path(path, doc["mesh_obj"].get<std::string>()));
        rig.template_vertices = mesh.vertices;
        rig.faces = mesh.faces;
    } else {
        for (const auto& v : doc.at("template_vertices")) {
            rig.template_vertices.push_back(vec3_from_json(v, "template vertex"));
        }
        for (const auto& f : doc.at("faces")) {
            if (!f.is_array() || f.size() != 3) throw FormatError("face must be a 3-array");
            rig.faces.push_back({f[0].get<int>(), f[1].get<int>(), f[2].get<int>()});
        }
    }

    const auto& parents = doc.at("parent_index");
    if (parents.size() != kNumJoints) throw FormatError("parent_index must have 21 entries");
    for (int j = 0; j < kNumJoints; ++j) {
        rig.parent_index[static_cast<size_t>(j)] = parents[static_cast<size_t>(j)].get<int>();
    }
    if (rig.parent_index[0] != kRootParent) {
        throw ValidationError("parent_index[0] must be -1 (root)");
    }
    for (int j = 1; j < kNumJoints; ++j) {
        if (rig.parent_index[static_cast<size_t>(j)] < 0 ||
            rig.parent_index[static_cast<size_t>(j)] >= j) {
            throw ValidationError("parent_index has a cycle or forward reference at joint " +
                                  std::to_string(j));
        }
    }

    const auto& joints = doc.at("rest_joint_positions");
    if (joints.size() != kNumJoints) throw FormatError("rest_joint_positions must have 21 entries");
    for (int j = 0; j < kNumJoints; ++j) {
        rig.rest_joint_positions[static_cast<size_t>(j)] =
            vec3_from_json(joints[static_cast<size_t>(j)], "rest joint");
    }

    const auto& weights = doc.at("skinning_weights");
    const int n = rig.vertex_count();
    if (static_cast<int>(weights.size()) != n) {
        throw ValidationError("skinning_weights rows must match vertex count");
    }
    rig.skinning_weights.resize(n, kNumJoints);
    bool renormalized = false;
    for (int i = 0; i < n; ++i) {
        const auto& row = weights[static_cast<size_t>(i)];
        if (row.size() != kNumJoints) throw FormatError("skinning weight row must have 21 entries");
        double sum = 0.0;
        for (int j = 0; j < kNumJoints; ++j) {
            const double w = row[static_cast<size_t>(j)].get<double>();
            if (w < 0.0) throw ValidationError("negative skinning weight at vertex " +
                                               std::to_string(i));
            rig.skinning_weights(i, j) = w;
            sum += w;
        }
        if (std::abs(sum - 1.0) > 1e-4) {
            throw ValidationError("skinning weight row " + std::to_string(i) +
                                  " sums to " + std::to_string(sum));
        }
        if (sum != 1.0) {
            rig.skinning_weights.row(i) /= sum;
            renormalized = true;
        }
    }
    if (renormalized) {
        std::cerr << "warning: skinning weights renormalized (rows within 1e-4 of 1)\n";
    }

    const auto& groups = doc.at("fingertip_groups");
    if (groups.size() != kNumFingers) throw FormatError("fingertip_groups must have 5 entries");
    for (int f = 0; f < kNumFingers; ++f) {
        for (const auto& idx : groups[static_cast<size_t>(f)]) {
            rig.fingertip_groups[static_cast<size_t>(f)].push_back(idx.get<int>());
        }
    }

    rig.validate();
    return rig;
}

void save_rig(const HandRig& rig, const std::string& path) {
    json doc;
    for (const Vec3& v : rig.template_vertices) doc["template_vertices"].push_back(vec3_to_json(v));
    for (const auto& f : rig.faces) doc["faces"].push_back(json::array({f[0], f[1], f[2]}));
    doc["parent_index"] = rig.parent_index;
    for (const Vec3& v : rig.rest_joint_positions) {
        doc["rest_joint_positions"].push_back(vec3_to_json(v));
    }
    for (int i = 0; i < rig.vertex_count(); ++i) {
        json row = json::array();
        for (int j = 0; j < kNumJoints; ++j) row.push_back(rig.skinning_weights(i, j));
        doc["skinning_weights"].push_back(row);
    }
    for (const auto& g : rig.fingertip_groups) doc["fingertip_groups"].push_back(g);
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path);
    out << doc.dump(1) << "\n";
}

HandPose load_pose(const std::string& path) {
    const json doc = parse_json_file(path);
    HandPose pose;
    pose.global_rotation = load_rotation_checked(doc.at("global_rotation"), "global_rotation");
    pose.translation = vec3_from_json(doc.at("translation"), "translation");
    const auto& rots = doc.at("joint_rotations");
    if (rots.size() != kNumJoints) throw FormatError("joint_rotations must have 21 entries");
    for (int j = 0; j < kNumJoints; ++j) {
        pose.joint_rotations[static_cast<size_t>(j)] = load_rotation_checked(
            rots[static_cast<size_t>(j)], "joint_rotations[" + std::to_string(j) + "]");
    }
    return pose;
}

void save_pose(const HandPose& pose, const std::string& path) {
    json doc;
    doc["global_rotation"] = mat3_to_json(pose.global_rotation);
    doc["translation"] = vec3_to_json(pose.translation);
    for (const Mat3& r : pose.joint_rotations) doc["joint_rotations"].push_back(mat3_to_json(r));
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path);
    out << doc.dump(1) << "\n";
}

ViewpointSet load_viewpoints(const std::string& path, bool require_images) {
    const json doc = parse_json_file(path);
    ViewpointSet set;
    set.seed = doc.value("seed", 0ULL);
    for (const auto& c : doc.at("cameras")) {
        Camera cam;
        cam.fx = c.at("fx").get<double>();
        cam.fy = c.at("fy").get<double>();
        cam.cx = c.at("cx").get<double>();
        cam.cy = c.at("cy").get<double>();
        cam.width = c.at("width").get<int>();
        cam.height = c.at("height").get<int>();
        cam.near_clip = c.value("near_clip", 0.01);
        const auto& m = c.at("world_to_camera");
        Mat4 w2c;
        if (m.size() == 4 && m[0].is_array()) {  // nested 4x4 rows
            for (int r = 0; r < 4; ++r) {
                if (m[static_cast<size_t>(r)].size() != 4) {
                    throw FormatError("world_to_camera rows must have 4 entries");
                }
                for (int col = 0; col < 4; ++col) {
                    w2c(r, col) = m[static_cast<size_t>(r)][static_cast<size_t>(col)].get<double>();
                }
            }
        } else if (m.size() == 16) {  // flat row-major
            for (int r = 0; r < 4; ++r) {
                for (int col = 0; col < 4; ++col) {
                    w2c(r, col) = m[static_cast<size_t>(4 * r + col)].get<double>();
                }
            }
        } else {
            throw FormatError("world_to_camera must be a 4x4 or flat 16-entry row-major array");
        }
        if ((w2c.row(3) - Eigen::RowVector4d(0, 0, 0, 1)).cwiseAbs().maxCoeff() > 1e-9 ||
            !is_rotation(w2c.block<3, 3>(0, 0), 1e-4)) {
            throw ValidationError("world_to_camera is not an invertible rigid transform");
        }
        cam.rotation = orthonormalize(w2c.block<3, 3>(0, 0));
        cam.translation = w2c.block<3, 1>(0, 3);
        cam.validate();
        set.cameras.push_back(cam);

        if (c.contains("image")) {
            Image img = load_image(sibling_path(path, c["image"].get<std::string>()));
            if (img.width != cam.width || img.height != cam.height) {
                throw StructuralError("target image dimensions do not match camera");
            }
            set.targets.push_back(std::move(img));
        } else if (require_images) {
            throw ValidationError("camera " + std::to_string(set.cameras.size() - 1) +
                                  " has no target image");
        } else {
            set.targets.emplace_back(cam.width, cam.height);
        }
    }
    if (set.cameras.empty()) throw ValidationError("viewpoint set is empty");
    return set;
}

Image load_image(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path);
    std::string magic;
    in >> magic;
    if (magic != "P3") throw FormatError(path + ": expected ASCII PPM (P3)");
    int width = 0, height = 0, maxval = 0;
    in >> width >> height >> maxval;
    if (width < 1 || height < 1 || maxval != 255) {
        throw FormatError(path + ": unsupported PPM dimensions or depth");
    }
    Image img(height, width);
    for (size_t i = 0; i < img.data.size(); ++i) {
        int v;
        if (!(in >> v) || v < 0 || v > 255) throw FormatError(path + ": bad sample value");
        img.data[i] = v / 255.0;
    }
    return img;
}

void save_image(const Image& image, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path);
    out << "P3\n" << image.width << " " << image.height << "\n255\n";
    for (int r = 0; r < image.height; ++r) {
        for (int c = 0; c < image.width; ++c) {
            for (int ch = 0; ch < 3; ++ch) {
                const int v = static_cast<int>(
                    std::lround(std::clamp(image.at(r, c, ch), 0.0, 1.0) * 255.0));
                out << v << (ch == 2 ? "" : " ");
            }
            out << "\n";
        }
    }
    if (!out) throw IoError("failed writing " + path);
}

namespace {
constexpr char kBindingMagic[4] = {'S', 'H', 'B', 'T'};
constexpr std::uint8_t kBindingVersion = 1;
}  // namespace

void save_binding(const BindingTable& table, int rig_face_count, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path);
    out.write(kBindingMagic, 4);
    write_raw(out, kBindingVersion);
    write_raw(out, static_cast<std::uint32_t>(table.size()));
    write_raw(out, static_cast<std::uint32_t>(rig_face_count));
    for (int i = 0; i < table.size(); ++i) {
        const size_t ui = static_cast<size_t>(i);
        write_raw(out, static_cast<std::int32_t>(table.face_index[ui]));
        for (int k = 0; k < 3; ++k) write_raw(out, table.local_position[ui][k]);
        write_raw(out, table.local_orientation[ui].w());
        write_raw(out, table.local_orientation[ui].x());
        write_raw(out, table.local_orientation[ui].y());
        write_raw(out, table.local_orientation[ui].z());
        for (int k = 0; k < 3; ++k) write_raw(out, table.canonical_scale[ui][k]);
    }
    if (!out) throw IoError("failed writing " + path);
}

BindingTable load_binding(const std::string& path, int expected_face_count,
                          int expected_gaussian_count) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path);
    char magic[4];
    if (!in.read(magic, 4) || std::memcmp(magic, kBindingMagic, 4) != 0) {
        throw FormatError(path + ": not a binding table file");
    }
    if (read_raw<std::uint8_t>(in, "version") != kBindingVersion) {
        throw FormatError(path + ": unsupported binding table version");
    }
    const auto count = read_raw<std::uint32_t>(in, "gaussian count");
    const auto face_count = read_raw<std::uint32_t>(in, "face count");
    if (expected_gaussian_count >= 0 &&
        count != static_cast<std::uint32_t>(expected_gaussian_count)) {
        throw StructuralError(path + ": binding table was built for " + std::to_string(count) +
                              " Gaussians");
    }
    if (expected_face_count >= 0 &&
        face_count != static_cast<std::uint32_t>(expected_face_count)) {
        throw StructuralError(path + ": binding table was built for a mesh with " +
                              std::to_string(face_count) + " faces");
    }
    BindingTable table;
    for (std::uint32_t i = 0; i < count; ++i) {
        table.face_index.push_back(read_raw<std::int32_t>(in, "face index"));
        Vec3 p;
        for (int k = 0; k < 3; ++k) p[k] = read_raw<double>(in, "local position");
        table.local_position.push_back(p);
        const double w = read_raw<double>(in, "quaternion");
        const double x = read_raw<double>(in, "quaternion");
        const double y = read_raw<double>(in, "quaternion");
        const double z = read_raw<double>(in, "quaternion");
        table.local_orientation.emplace_back(w, x, y, z);
        Vec3 s;
        for (int k = 0; k < 3; ++k) s[k] = read_raw<double>(in, "canonical scale");
        table.canonical_scale.push_back(s);
        if (table.face_index.back() < 0 ||
            table.face_index.back() >= static_cast<int>(face_count)) {
            throw FormatError(path + ": face index out of range at element " + std::to_string(i));
        }
    }
    return table;
}

HandState load_hand_state(const std::string& path) {
    const json doc = parse_json_file(path);
    HandState state;
    for (const auto& v : doc.at("vertices")) {
        state.vertices.push_back(vec3_from_json(v, "vertex"));
    }
    const auto& joints = doc.at("joints");
    if (joints.size() != kNumJoints) throw FormatError("joints must have 21 entries");
    for (int j = 0; j < kNumJoints; ++j) {
        state.joints[static_cast<size_t>(j)] =
            vec3_from_json(joints[static_cast<size_t>(j)], "joint");
    }
    state.pose.global_rotation =
        load_rotation_checked(doc.at("global_rotation"), "global_rotation");
    state.pose.translation = vec3_from_json(doc.at("translation"), "translation");
    const auto& rots = doc.at("joint_rotations");
    if (rots.size() != kNumJoints) throw FormatError("joint_rotations must have 21 entries");
    for (int j = 0; j < kNumJoints; ++j) {
        state.pose.joint_rotations[static_cast<size_t>(j)] = load_rotation_checked(
            rots[static_cast<size_t>(j)], "joint_rotations[" + std::to_string(j) + "]");
    }
    return state;
}

void save_hand_state(const HandState& state, const std::string& path) {
    json doc;
    for (const Vec3& v : state.vertices) doc["vertices"].push_back(vec3_to_json(v));
    for (const Vec3& v : state.joints) doc["joints"].push_back(vec3_to_json(v));
    doc["global_rotation"] = mat3_to_json(state.pose.global_rotation);
    doc["translation"] = vec3_to_json(state.pose.translation);
    for (const Mat3& r : state.pose.joint_rotations) {
        doc["joint_rotations"].push_back(mat3_to_json(r));
    }
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path);
    out << doc.dump(1) << "\n";
}

ProjectConfig load_project_config(const std::string& path) {
    const json doc = parse_json_file(path);
    ProjectConfig cfg;
    cfg.rig_path = sibling_path(path, doc.at("rig").get<std::string>());
    cfg.hand_ply_path = sibling_path(path, doc.at("hand_ply").get<std::string>());
    if (doc.contains("object_ply")) {
        cfg.object_ply_path = sibling_path(path, doc["object_ply"].get<std::string>());
    }
    cfg.viewpoints_path = sibling_path(path, doc.at("viewpoints").get<std::string>());
    for (const std::string& p : {cfg.rig_path, cfg.hand_ply_path, cfg.viewpoints_path}) {
        if (!std::ifstream(p)) throw IoError("referenced file does not exist: " + p);
    }
    if (!cfg.object_ply_path.empty() && !std::ifstream(cfg.object_ply_path)) {
        throw IoError("referenced file does not exist: " + cfg.object_ply_path);
    }
    if (doc.contains("loss_weights")) {
        const auto& w = doc["loss_weights"];
        cfg.weights.lambda_verts = w.value("lambda_verts", cfg.weights.lambda_verts);
        cfg.weights.lambda_joints = w.value("lambda_joints", cfg.weights.lambda_joints);
        cfg.weights.lambda_pose = w.value("lambda_pose", cfg.weights.lambda_pose);
        cfg.weights.lambda_transl = w.value("lambda_transl", cfg.weights.lambda_transl);
        cfg.weights.lambda_reg = w.value("lambda_reg", cfg.weights.lambda_reg);
        cfg.weights.lambda_1 = w.value("lambda_1", cfg.weights.lambda_1);
        cfg.weights.validate();
    }
    if (doc.contains("refine")) {
        const auto& r = doc["refine"];
        cfg.refine.max_iterations = r.value("max_iterations", cfg.refine.max_iterations);
        cfg.refine.lr_rotation = r.value("lr_rotation", cfg.refine.lr_rotation);
        cfg.refine.lr_translation = r.value("lr_translation", cfg.refine.lr_translation);
        cfg.refine.convergence_tol = r.value("convergence_tol", cfg.refine.convergence_tol);
        cfg.refine.convergence_window =
            r.value("convergence_window", cfg.refine.convergence_window);
        cfg.refine.lambda_1 = r.value("lambda_1", cfg.refine.lambda_1);
        if (r.contains("background")) {
            cfg.refine.background = vec3_from_json(r["background"], "background");
        }
        cfg.refine.validate();
    }
    if (doc.contains("grasp")) {
        cfg.contact_eps = doc["grasp"].value("contact_eps", cfg.contact_eps);
        cfg.penetration_limit = doc["grasp"].value("penetration_limit", cfg.penetration_limit);
    }
    cfg.seed = doc.value("seed", 0ULL);
    return cfg;
}

std::string report_to_json(const RefineReport& report) {
    json doc;
    doc["converged"] = report.converged;
    doc["diverged"] = report.diverged;
    doc["iterations_used"] = report.iterations_used;
    doc["skipped_iterations"] = report.skipped_iterations;
    doc["loss_trace"] = report.loss_trace;
    doc["per_view_loss"] = report.per_view_loss;
    doc["final_pose"]["global_rotation"] = mat3_to_json(report.final_pose.global_rotation);
    doc["final_pose"]["translation"] = vec3_to_json(report.final_pose.translation);
    for (const Mat3& r : report.final_pose.joint_rotations) {
        doc["final_pose"]["joint_rotations"].push_back(mat3_to_json(r));
    }
    return doc.dump(1) + "\n";
}

std::string report_to_json(const ContactReport& report) {
    json doc;
    doc["contacts"] = report.contacts;
    doc["min_distance"] = report.min_distance;
    doc["max_penetration"] = report.max_penetration;
    doc["penetration_known"] = report.penetration_known;
    doc["success"] = report.success;
    return doc.dump(1) + "\n";
}

std::string breakdown_to_json(const LossBreakdown& breakdown) {
    json doc;
    doc["verts"] = breakdown.verts;
    doc["joints"] = breakdown.joints;
    doc["pose"] = breakdown.pose;
    doc["transl"] = breakdown.transl;
    doc["reg"] = breakdown.reg;
    doc["mano"] = breakdown.mano;
    if (breakdown.img) doc["img"] = *breakdown.img;
    if (breakdown.total) doc["total"] = *breakdown.total;
    return doc.dump(1) + "\n";
}

HeatmapStack load_heatmaps(const std::string& path) {
    const json doc = parse_json_file(path);
    HeatmapStack stack;
    const auto& maps = doc.at("maps");
    if (maps.size() != kNumJoints) throw FormatError("maps must have 21 entries");
    for (const auto& m : maps) {
        const int rows = static_cast<int>(m.size());
        if (rows < 1) throw FormatError("heatmap has no rows");
        const int cols = static_cast<int>(m[0].size());
        Eigen::MatrixXd mat(rows, cols);
        for (int u = 0; u < rows; ++u) {
            if (static_cast<int>(m[static_cast<size_t>(u)].size()) != cols) {
                throw FormatError("ragged heatmap rows");
            }
            for (int v = 0; v < cols; ++v) {
                mat(u, v) = m[static_cast<size_t>(u)][static_cast<size_t>(v)].get<double>();
            }
        }
        stack.values.push_back(std::move(mat));
    }
    const auto& beta = doc.at("beta");
    if (beta.is_number()) {
        stack.beta.assign(kNumJoints, beta.get<double>());
    } else {
        if (beta.size() != kNumJoints) throw FormatError("beta must have 21 entries or be scalar");
        for (const auto& b : beta) stack.beta.push_back(b.get<double>());
    }
    stack.validate();
    return stack;
}

}  // namespace splathand
