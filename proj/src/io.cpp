#include "hfce/io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <vector>

namespace hfce {

namespace {

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

void write_complex_block(std::ofstream& out, const ComplexVector& v) {
    std::vector<double> flat(2 * v.size());
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        flat[2 * i] = v(i).real();
        flat[2 * i + 1] = v(i).imag();
    }
    out.write(reinterpret_cast<const char*>(flat.data()),
              static_cast<std::streamsize>(flat.size() * sizeof(double)));
}

ComplexVector read_complex_block(std::ifstream& in, Eigen::Index n) {
    std::vector<double> flat(2 * n);
    in.read(reinterpret_cast<char*>(flat.data()),
            static_cast<std::streamsize>(flat.size() * sizeof(double)));
    if (!in) throw std::runtime_error("import_channel: truncated binary payload");
    ComplexVector v(n);
    for (Eigen::Index i = 0; i < n; ++i) v(i) = Complex(flat[2 * i], flat[2 * i + 1]);
    return v;
}

}  // namespace

void export_channel(const SystemGeometry& geom, const ChannelRealization& ch,
                    const std::string& base) {
    std::ofstream hdr(base + ".hdr.csv", std::ios::binary);
    if (!hdr) throw std::runtime_error("export_channel: cannot write " + base + ".hdr.csv");
    hdr << "key,value\n";
    hdr << "bs_antennas," << geom.bs_antennas << '\n';
    hdr << "ris_elements," << geom.ris_elements << '\n';
    hdr << "subarrays," << geom.subarrays << '\n';
    hdr << "carrier_hz," << fmt(geom.carrier_hz) << '\n';
    hdr << "wavelength," << fmt(geom.lambda()) << '\n';
    hdr << "spacing," << fmt(geom.d()) << '\n';
    hdr << "bs_x," << fmt(geom.bs_anchor.x()) << '\n';
    hdr << "bs_y," << fmt(geom.bs_anchor.y()) << '\n';
    hdr << "user_range_min," << fmt(geom.user_range_min) << '\n';
    hdr << "user_range_max," << fmt(geom.user_range_max) << '\n';
    hdr << "l_user," << ch.paths.user_count() << '\n';
    hdr << "l_rb," << ch.paths.rb_count() << '\n';
    hdr << "table,user_paths:angle:range:gain_re:gain_im\n";
    for (const UserPath& p : ch.paths.user_paths)
        hdr << "user_path," << fmt(p.angle) << ':' << fmt(p.range) << ':' << fmt(p.gain.real())
            << ':' << fmt(p.gain.imag()) << '\n';
    hdr << "table,rb_paths:bs_angle:ris_angle:gain_re:gain_im\n";
    for (const RisBsPath& p : ch.paths.rb_paths)
        hdr << "rb_path," << fmt(p.bs_angle) << ':' << fmt(p.ris_angle) << ':'
            << fmt(p.gain.real()) << ':' << fmt(p.gain.imag()) << '\n';
    hdr << "table,vr_sub:column-major\n";
    for (Eigen::Index l = 0; l < ch.vr.phi_sub.cols(); ++l) {
        hdr << "vr_col";
        for (Eigen::Index k = 0; k < ch.vr.phi_sub.rows(); ++k) hdr << ',' << ch.vr.phi_sub(k, l);
        hdr << '\n';
    }

    std::ofstream bin(base + ".bin", std::ios::binary);
    if (!bin) throw std::runtime_error("export_channel: cannot write " + base + ".bin");
    write_complex_block(bin, ch.h_user);
    ComplexVector hvec(ch.ris_bs.size());
    for (Eigen::Index j = 0; j < ch.ris_bs.cols(); ++j)
        hvec.segment(j * ch.ris_bs.rows(), ch.ris_bs.rows()) = ch.ris_bs.col(j);
    write_complex_block(bin, hvec);
    write_complex_block(bin, ch.h_cascaded);
}

ImportedChannel import_channel(const std::string& base) {
    std::ifstream hdr(base + ".hdr.csv");
    if (!hdr) throw std::runtime_error("import_channel: cannot open " + base + ".hdr.csv");
    ImportedChannel out;
    SystemGeometry& g = out.geom;
    ChannelRealization& ch = out.ch;
    int l_user = 0, l_rb = 0;
    std::vector<std::vector<int>> vr_cols;

    std::string line;
    std::getline(hdr, line);  // header row
    while (std::getline(hdr, line)) {
        if (line.empty()) continue;
        const auto comma = line.find(',');
        if (comma == std::string::npos) continue;
        const std::string key = line.substr(0, comma);
        const std::string val = line.substr(comma + 1);
        auto split = [](const std::string& s, char sep) {
            std::vector<std::string> parts;
            std::istringstream ss(s);
            std::string tok;
            while (std::getline(ss, tok, sep)) parts.push_back(tok);
            return parts;
        };
        if (key == "bs_antennas") g.bs_antennas = std::stoi(val);
        else if (key == "ris_elements") g.ris_elements = std::stoi(val);
        else if (key == "subarrays") g.subarrays = std::stoi(val);
        else if (key == "carrier_hz") g.carrier_hz = std::stod(val);
        else if (key == "bs_x") g.bs_anchor.x() = std::stod(val);
        else if (key == "bs_y") g.bs_anchor.y() = std::stod(val);
        else if (key == "user_range_min") g.user_range_min = std::stod(val);
        else if (key == "user_range_max") g.user_range_max = std::stod(val);
        else if (key == "l_user") l_user = std::stoi(val);
        else if (key == "l_rb") l_rb = std::stoi(val);
        else if (key == "user_path") {
            const auto f = split(val, ':');
            ch.paths.user_paths.push_back(
                {std::stod(f[0]), std::stod(f[1]), Complex(std::stod(f[2]), std::stod(f[3]))});
        } else if (key == "rb_path") {
            const auto f = split(val, ':');
            ch.paths.rb_paths.push_back(
                {std::stod(f[0]), std::stod(f[1]), Complex(std::stod(f[2]), std::stod(f[3]))});
        } else if (key == "vr_col") {
            const auto f = split(val, ',');
            std::vector<int> col;
            for (const auto& s : f) col.push_back(std::stoi(s));
            vr_cols.push_back(col);
        }
    }
    if (static_cast<int>(ch.paths.user_paths.size()) != l_user ||
        static_cast<int>(ch.paths.rb_paths.size()) != l_rb)
        throw std::runtime_error("import_channel: path table does not match declared counts");

    ch.vr.phi_sub.resize(g.subarrays, l_user);
    for (int l = 0; l < l_user; ++l)
        for (int k = 0; k < g.subarrays; ++k) ch.vr.phi_sub(k, l) = vr_cols.at(l).at(k);
    ch.vr.phi.resize(g.ris_elements, l_user);
    const int rep = g.elements_per_subarray();
    for (int l = 0; l < l_user; ++l)
        for (int k = 0; k < g.subarrays; ++k)
            ch.vr.phi.col(l).segment(k * rep, rep).setConstant(ch.vr.phi_sub(k, l));

    std::ifstream bin(base + ".bin", std::ios::binary);
    if (!bin) throw std::runtime_error("import_channel: cannot open " + base + ".bin");
    ch.h_user = read_complex_block(bin, g.ris_elements);
    const ComplexVector hflat = read_complex_block(bin, g.bs_antennas * g.ris_elements);
    ch.ris_bs.resize(g.bs_antennas, g.ris_elements);
    for (int j = 0; j < g.ris_elements; ++j)
        ch.ris_bs.col(j) = hflat.segment(j * g.bs_antennas, g.bs_antennas);
    ch.h_cascaded = read_complex_block(bin, g.bs_antennas * g.ris_elements);
    return out;
}

void write_grid_csv(const PolarGrid& grid, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("write_grid_csv: cannot write " + path);
    out << "index,angle,range,curvature\n";
    for (int i = 0; i < grid.size(); ++i) {
        const GridPoint& p = grid.points[i];
        out << i << ',' << fmt(p.angle) << ',' << fmt(p.range) << ',' << fmt(p.curvature) << '\n';
    }
}

}  // namespace hfce
