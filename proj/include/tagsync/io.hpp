#pragma once

#include <string>
#include <vector>

#include "tagsync/channel.hpp"
#include "tagsync/detect.hpp"
#include "tagsync/waveform.hpp"

namespace tagsync {

// Binary sample container: little-endian header (magic "PSSW", version u16,
// sample_rate_hz f64, count u64) followed by the payload. The version field
// doubles as the payload kind:
//   1  interleaved f64 (re, im) pairs
//   2  f64 envelope samples
//   3  bits packed 8 per byte, LSB first
// Annotations travel in a JSON sidecar. All writers throw std::runtime_error
// on I/O failure.

void write_waveform(const std::string& path, const IqWaveform& wave);
IqWaveform read_waveform(const std::string& path);

void write_envelope_bin(const std::string& path, const Envelope& env);
Envelope read_envelope_bin(const std::string& path);

void write_bits_bin(const std::string& path, const BitStream& bits);
BitStream read_bits_bin(const std::string& path);

// CSV forms: "index,value" per row.
void write_envelope_csv(const std::string& path, const Envelope& env);
void write_bits_csv(const std::string& path, const BitStream& bits);

// Sidecar with annotations and ground-truth centers.
void write_annotations(const std::string& path, const IqWaveform& wave);

// Per-detection records:
// method,nid2_true,nid2_guess,center,error_us,delay_us,committed_at
void write_sync_records_csv(const std::string& path, const std::vector<SyncResult>& results,
                            const std::vector<int>& nid2_true);

} // namespace tagsync
