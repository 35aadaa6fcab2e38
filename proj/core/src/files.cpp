#include "lumio/files.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace lumio::io {

namespace {

std::string format_number(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

[[noreturn]] void fail(const std::filesystem::path& path, const std::string& what) {
  throw std::runtime_error(path.string() + ": " + what);
}

std::ifstream open_input(const std::filesystem::path& path, bool binary = false) {
  std::ifstream in(path, binary ? std::ios::binary : std::ios::in);
  if (!in) fail(path, "cannot open for reading");
  return in;
}

std::ofstream open_output(const std::filesystem::path& path, bool binary = false) {
  std::ofstream out(path, binary ? std::ios::binary : std::ios::out);
  if (!out) fail(path, "cannot open for writing");
  return out;
}

std::vector<double> parse_numbers(const std::string& line) {
  std::vector<double> values;
  std::istringstream ss(line);
  double v;
  while (ss >> v) values.push_back(v);
  std::string leftover;
  if (ss.clear(), ss >> leftover) {
    throw std::runtime_error("trailing garbage '" + leftover + "'");
  }
  return values;
}

std::vector<double> parse_csv_line(const std::string& line, std::size_t expected) {
  std::vector<double> values;
  std::size_t start = 0;
  while (start <= line.size()) {
    const std::size_t comma = line.find(',', start);
    const std::string field =
        line.substr(start, comma == std::string::npos ? std::string::npos : comma - start);
    std::size_t used = 0;
    double v;
    try {
      v = std::stod(field, &used);
    } catch (const std::exception&) {
      throw std::runtime_error("field '" + field + "' is not a number");
    }
    while (used < field.size() && std::isspace(static_cast<unsigned char>(field[used])))
      ++used;
    if (used != field.size()) throw std::runtime_error("field '" + field + "' has trailing text");
    values.push_back(v);
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  if (values.size() != expected) {
    throw std::runtime_error("expected " + std::to_string(expected) + " fields, got " +
                             std::to_string(values.size()));
  }
  return values;
}

}  // namespace

std::string format_pose_line(const Pose& p) {
  const Mat3& r = p.rotation.matrix();
  std::string line;
  for (int row = 0; row < 3; ++row) {
    for (int col = 0; col < 3; ++col) {
      line += format_number(r(row, col));
      line += ' ';
    }
    line += format_number(p.translation[row]);
    if (row != 2) line += ' ';
  }
  return line;
}

Pose parse_pose_line(const std::string& line, double orthonormal_tol) {
  const std::vector<double> v = parse_numbers(line);
  if (v.size() != 12) {
    throw std::runtime_error("expected 12 numbers, got " + std::to_string(v.size()));
  }
  for (double x : v) {
    if (!std::isfinite(x)) throw std::runtime_error("non-finite number");
  }
  Mat3 r;
  Vec3 t;
  for (int row = 0; row < 3; ++row) {
    for (int col = 0; col < 3; ++col) r(row, col) = v[row * 4 + col];
    t[row] = v[row * 4 + 3];
  }
  try {
    return Pose(Rotation(r, orthonormal_tol), t);
  } catch (const std::invalid_argument& e) {
    throw std::runtime_error(e.what());
  }
}

void write_pose_file(const Trajectory& traj, const std::filesystem::path& path) {
  auto out = open_output(path);
  for (const auto& tp : traj.poses) out << format_pose_line(tp.pose) << '\n';
  if (!out) fail(path, "write failed");
}

Trajectory read_pose_file(const std::filesystem::path& path, double dt) {
  auto in = open_input(path);
  Trajectory traj;
  traj.frame = "camera0";
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    try {
      traj.poses.push_back(
          {static_cast<double>(traj.poses.size()) * dt, parse_pose_line(line)});
    } catch (const std::exception& e) {
      fail(path, "line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  if (traj.poses.empty()) fail(path, "no poses found");
  return traj;
}

void write_imu_csv(const std::vector<imu::ImuSample>& samples,
                   const std::filesystem::path& path) {
  auto out = open_output(path);
  out << "t,ax,ay,az,wx,wy,wz\n";
  for (const auto& s : samples) {
    out << format_number(s.t);
    for (int i = 0; i < 3; ++i) out << ',' << format_number(s.accel[i]);
    for (int i = 0; i < 3; ++i) out << ',' << format_number(s.gyro[i]);
    out << '\n';
  }
  if (!out) fail(path, "write failed");
}

std::vector<imu::ImuSample> read_imu_csv(const std::filesystem::path& path) {
  auto in = open_input(path);
  std::string line;
  if (!std::getline(in, line) || line != "t,ax,ay,az,wx,wy,wz") {
    fail(path, "expected header 't,ax,ay,az,wx,wy,wz'");
  }
  std::vector<imu::ImuSample> samples;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    try {
      const auto v = parse_csv_line(line, 7);
      imu::ImuSample s;
      s.t = v[0];
      s.accel = Vec3(v[1], v[2], v[3]);
      s.gyro = Vec3(v[4], v[5], v[6]);
      samples.push_back(s);
    } catch (const std::exception& e) {
      fail(path, "line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return samples;
}

void write_gnss_csv(const std::vector<imu::GnssFix>& fixes,
                    const std::filesystem::path& path) {
  auto out = open_output(path);
  out << "t,x,y,z,sigma\n";
  for (const auto& f : fixes) {
    out << format_number(f.t);
    for (int i = 0; i < 3; ++i) out << ',' << format_number(f.position[i]);
    out << ',' << format_number(f.sigma) << '\n';
  }
  if (!out) fail(path, "write failed");
}

std::vector<imu::GnssFix> read_gnss_csv(const std::filesystem::path& path) {
  auto in = open_input(path);
  std::string line;
  if (!std::getline(in, line) || line != "t,x,y,z,sigma") {
    fail(path, "expected header 't,x,y,z,sigma'");
  }
  std::vector<imu::GnssFix> fixes;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    try {
      const auto v = parse_csv_line(line, 5);
      imu::GnssFix f;
      f.t = v[0];
      f.position = Vec3(v[1], v[2], v[3]);
      f.sigma = v[4];
      if (!(f.sigma > 0.0)) throw std::runtime_error("sigma must be > 0");
      fixes.push_back(f);
    } catch (const std::exception& e) {
      fail(path, "line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return fixes;
}

void write_trajectory_csv(const Trajectory& traj, const std::filesystem::path& path) {
  auto out = open_output(path);
  out << "t,x,y,z,qx,qy,qz,qw\n";
  for (const auto& tp : traj.poses) {
    Eigen::Quaterniond q(tp.pose.rotation.matrix());
    if (q.w() < 0.0) q.coeffs() = -q.coeffs();
    out << format_number(tp.t);
    for (int i = 0; i < 3; ++i) out << ',' << format_number(tp.pose.translation[i]);
    out << ',' << format_number(q.x()) << ',' << format_number(q.y()) << ','
        << format_number(q.z()) << ',' << format_number(q.w()) << '\n';
  }
  if (!out) fail(path, "write failed");
}

void write_ppm(const vonet::Image& img, const std::filesystem::path& path) {
  auto out = open_output(path, /*binary=*/true);
  out << "P6\n" << img.width << ' ' << img.height << "\n255\n";
  std::vector<unsigned char> row(static_cast<std::size_t>(img.width) * 3);
  for (int y = 0; y < img.height; ++y) {
    for (int x = 0; x < img.width; ++x) {
      for (int c = 0; c < 3; ++c) {
        const double v = std::clamp(img.channels[c](y, x), 0.0, 1.0);
        row[static_cast<std::size_t>(x) * 3 + c] =
            static_cast<unsigned char>(std::lround(v * 255.0));
      }
    }
    out.write(reinterpret_cast<const char*>(row.data()), static_cast<std::streamsize>(row.size()));
  }
  if (!out) fail(path, "write failed");
}

namespace {

int read_pnm_token(std::istream& in, const std::filesystem::path& path) {
  // Skips whitespace and '#' comments per the netpbm spec.
  int c = in.get();
  while (c != EOF) {
    if (c == '#') {
      while (c != EOF && c != '\n') c = in.get();
    } else if (!std::isspace(c)) {
      break;
    }
    c = in.get();
  }
  if (c == EOF) fail(path, "truncated header");
  int value = 0;
  bool any = false;
  while (c != EOF && std::isdigit(c)) {
    value = value * 10 + (c - '0');
    any = true;
    c = in.get();
  }
  if (!any) fail(path, "malformed header");
  return value;
}

}  // namespace

vonet::Image read_pnm(const std::filesystem::path& path) {
  auto in = open_input(path, /*binary=*/true);
  char magic[2] = {0, 0};
  in.read(magic, 2);
  if (magic[0] != 'P' || (magic[1] != '5' && magic[1] != '6')) {
    fail(path, "not a binary PGM/PPM file");
  }
  const bool color = magic[1] == '6';
  const int width = read_pnm_token(in, path);
  const int height = read_pnm_token(in, path);
  const int maxval = read_pnm_token(in, path);
  if (width <= 0 || height <= 0) fail(path, "invalid dimensions");
  if (maxval != 255) fail(path, "only maxval 255 is supported");

  const std::size_t n = static_cast<std::size_t>(width) * height * (color ? 3 : 1);
  std::vector<unsigned char> data(n);
  in.read(reinterpret_cast<char*>(data.data()), static_cast<std::streamsize>(n));
  if (static_cast<std::size_t>(in.gcount()) != n) fail(path, "truncated pixel data");

  vonet::Image img;
  img.height = height;
  img.width = width;
  for (auto& ch : img.channels) ch.resize(height, width);
  std::size_t idx = 0;
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      if (color) {
        for (int c = 0; c < 3; ++c) img.channels[c](y, x) = data[idx++] / 255.0;
      } else {
        const double v = data[idx++] / 255.0;
        for (int c = 0; c < 3; ++c) img.channels[c](y, x) = v;
      }
    }
  }
  return img;
}

}  // namespace lumio::io
