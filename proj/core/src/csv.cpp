#include "hbvm/csv.hpp"

#include <charconv>
#include <fstream>
#include <stdexcept>
#include <system_error>

namespace hbvm {

std::string format_double(double value) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), value, std::chars_format::general, 17);
  if (res.ec != std::errc{}) throw std::runtime_error("format_double: conversion failed");
  return std::string(buf, res.ptr);
}

namespace {

std::ofstream open_for_writing(const std::string& path) {
  std::ofstream out(path, std::ios::out | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
  return out;
}

void finish(std::ofstream& out, const std::string& path) {
  out.flush();
  if (!out) throw std::runtime_error("write to '" + path + "' failed");
}

}  // namespace

void emit_csv(const Trajectory& trajectory, const std::string& path) {
  auto out = open_for_writing(path);
  const std::size_t m = trajectory.m;
  out << "t";
  for (std::size_t i = 1; i <= m; ++i) out << ",q" << i;
  for (std::size_t i = 1; i <= m; ++i) out << ",p" << i;
  out << '\n';
  for (std::size_t n = 0; n < trajectory.samples(); ++n) {
    out << format_double(trajectory.times[n]);
    for (double v : trajectory.states[n]) out << ',' << format_double(v);
    out << '\n';
  }
  finish(out, path);
}

void emit_energy_csv(const Trajectory& trajectory, const std::string& path) {
  auto out = open_for_writing(path);
  out << "t,H_error\n";
  for (std::size_t n = 0; n < trajectory.samples(); ++n)
    out << format_double(trajectory.times[n]) << ',' << format_double(trajectory.energy_error[n])
        << '\n';
  finish(out, path);
}

}  // namespace hbvm
