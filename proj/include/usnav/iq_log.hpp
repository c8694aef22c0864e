#pragma once

// Line-delimited JSON log of IQ frames, one frame per line:
//   {"sensor_id":"A","t_emit":0.0,"f_op_hz":175000.0,"odr_hz":87500.0,"samples":[[i,q],...]}

#include <fstream>
#include <istream>
#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "usnav/signal_core.hpp"

namespace usnav {

inline nlohmann::json frame_to_json(const IQFrame& frame) {
  nlohmann::json samples = nlohmann::json::array();
  for (const auto& s : frame.samples) samples.push_back({s.i, s.q});
  return {{"sensor_id", frame.sensor_id},
          {"t_emit", frame.t_emit},
          {"f_op_hz", frame.f_op_hz},
          {"odr_hz", frame.odr_hz},
          {"samples", std::move(samples)}};
}

inline IQFrame frame_from_json(const nlohmann::json& j) {
  IQFrame frame;
  try {
    frame.sensor_id = j.at("sensor_id").get<std::string>();
    frame.t_emit = j.at("t_emit").get<double>();
    frame.f_op_hz = j.at("f_op_hz").get<double>();
    frame.odr_hz = j.at("odr_hz").get<double>();
    for (const auto& pair : j.at("samples")) {
      if (!pair.is_array() || pair.size() != 2) throw Error(ErrorCode::io, "sample must be an [i, q] pair");
      frame.samples.push_back({pair[0].get<double>(), pair[1].get<double>()});
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::io, std::string("malformed IQ frame record: ") + e.what());
  }
  validate(frame);
  return frame;
}

inline void write_frame(std::ostream& out, const IQFrame& frame) { out << frame_to_json(frame).dump() << '\n'; }

inline std::vector<IQFrame> read_frames(std::istream& in) {
  std::vector<IQFrame> frames;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      throw Error(ErrorCode::io, "line " + std::to_string(line_no) + ": " + e.what());
    }
    frames.push_back(frame_from_json(j));
  }
  return frames;
}

inline std::vector<IQFrame> read_frames(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::io, "cannot open " + path);
  return read_frames(in);
}

}  // namespace usnav
