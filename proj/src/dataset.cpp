#include "vowelmark/dataset.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>

#include "vowelmark/dsp.hpp"
#include "vowelmark/util.hpp"

namespace fs = std::filesystem;

namespace vowelmark {

namespace {

std::string lower(std::string s) {
  for (auto& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return s;
}

Vowel parse_vowel(const std::string& s, const std::string& context) {
  std::string v = lower(trim_ws(s));
  if (v == "a") return Vowel::A;
  if (v == "i") return Vowel::I;
  throw InputError("manifest: bad vowel '" + s + "' " + context);
}

Label parse_label(const std::string& s, const std::string& context) {
  std::string v = trim_ws(s);
  if (v == "0") return Label::HC;
  if (v == "1") return Label::ALS;
  throw InputError("manifest: label must be 0 or 1, got '" + s + "' " + context);
}

}  // namespace

CorpusManifest load_corpus(const std::string& manifest_path) {
  std::ifstream in(manifest_path);
  if (!in) throw InputError("cannot open manifest: " + manifest_path);

  const fs::path base = fs::path(manifest_path).parent_path();

  std::string line;
  if (!std::getline(in, line)) throw InputError("manifest is empty: " + manifest_path);
  auto header = split_csv_line(line);
  if (header.size() < 4 || lower(header[0]) != "subject_id" || lower(header[1]) != "vowel" ||
      lower(header[2]) != "label" || lower(header[3]) != "path") {
    throw InputError("manifest header must be 'subject_id,vowel,label,path': " + manifest_path);
  }

  CorpusManifest m;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim_ws(line).empty()) continue;
    auto cols = split_csv_line(line);
    const std::string ctx = "(line " + std::to_string(lineno) + ")";
    if (cols.size() < 4) throw InputError("manifest: expected 4 columns " + ctx);
    ManifestEntry e;
    e.subject_id = cols[0];
    e.vowel = parse_vowel(cols[1], ctx);
    e.label = parse_label(cols[2], ctx);
    fs::path p(cols[3]);
    if (p.is_relative()) p = base / p;
    e.path = p.string();
    if (!fs::exists(e.path)) throw InputError("manifest: missing audio file " + e.path + " " + ctx);
    m.entries.push_back(std::move(e));
  }

  if (m.entries.empty()) throw InputError("manifest has no entries: " + manifest_path);

  // Pairing invariant: each subject exactly one /a/ and one /i/, same label.
  std::map<std::string, std::vector<const ManifestEntry*>> by_subject;
  for (const auto& e : m.entries) by_subject[e.subject_id].push_back(&e);
  for (const auto& [sid, es] : by_subject) {
    int na = 0, ni = 0;
    for (const auto* e : es) (e->vowel == Vowel::A ? na : ni)++;
    if (na != 1 || ni != 1) {
      throw InputError("manifest: subject '" + sid + "' must have exactly one /a/ and one /i/ entry (has " +
                       std::to_string(na) + " /a/, " + std::to_string(ni) + " /i/)");
    }
    if (es[0]->label != es[1]->label) {
      throw InputError("manifest: subject '" + sid + "' has conflicting labels");
    }
    (es[0]->label == Label::ALS ? m.n_als : m.n_hc)++;
  }
  m.n_subjects = static_cast<int>(by_subject.size());

  std::sort(m.entries.begin(), m.entries.end(), [](const ManifestEntry& a, const ManifestEntry& b) {
    if (a.subject_id != b.subject_id) return a.subject_id < b.subject_id;
    return static_cast<int>(a.vowel) < static_cast<int>(b.vowel);
  });

  log_info("corpus: " + std::to_string(m.n_subjects) + " subjects (" + std::to_string(m.n_als) +
           " ALS, " + std::to_string(m.n_hc) + " HC), " + std::to_string(m.entries.size()) +
           " recordings");
  return m;
}

void write_manifest(const std::string& path, std::span<const ManifestEntry> entries) {
  std::ofstream out(path);
  if (!out) throw InputError("cannot write manifest: " + path);
  out << "subject_id,vowel,label,path\n";
  for (const auto& e : entries) {
    out << e.subject_id << ',' << vowel_char(e.vowel) << ',' << static_cast<int>(e.label) << ','
        << e.path << '\n';
  }
}

std::vector<ManifestEntry> scan_corpus_layout(const std::string& root_dir) {
  if (!fs::is_directory(root_dir)) throw InputError("not a directory: " + root_dir);

  static const std::set<std::string> als_names = {"als", "patients", "pathological", "pat"};
  static const std::set<std::string> hc_names = {"hc", "norm", "normal", "healthy", "control", "controls"};

  std::vector<ManifestEntry> entries;
  for (const auto& de : fs::recursive_directory_iterator(root_dir)) {
    if (!de.is_regular_file()) continue;
    if (lower(de.path().extension().string()) != ".wav") continue;

    // Class from the nearest ancestor directory with a recognized name.
    std::optional<Label> label;
    for (fs::path p = de.path().parent_path(); p.has_relative_path() && p != p.root_path();
         p = p.parent_path()) {
      std::string name = lower(p.filename().string());
      if (als_names.count(name)) { label = Label::ALS; break; }
      if (hc_names.count(name)) { label = Label::HC; break; }
      if (p == fs::path(root_dir)) break;
    }
    if (!label) {
      log_warn("ingest: cannot infer class for " + de.path().string() + ", skipped");
      continue;
    }

    // <subject><sep><vowel>.wav where sep is one of "_-." or absent.
    std::string stem = de.path().stem().string();
    if (stem.size() < 2) continue;
    char vc = static_cast<char>(std::tolower(static_cast<unsigned char>(stem.back())));
    if (vc != 'a' && vc != 'i') {
      log_warn("ingest: no vowel suffix in " + de.path().string() + ", skipped");
      continue;
    }
    std::string sid = stem.substr(0, stem.size() - 1);
    while (!sid.empty() && (sid.back() == '_' || sid.back() == '-' || sid.back() == '.')) sid.pop_back();
    if (sid.empty()) continue;

    ManifestEntry e;
    e.subject_id = sid;
    e.vowel = (vc == 'a') ? Vowel::A : Vowel::I;
    e.label = *label;
    e.path = fs::absolute(de.path()).string();
    entries.push_back(std::move(e));
  }

  std::sort(entries.begin(), entries.end(), [](const ManifestEntry& a, const ManifestEntry& b) {
    if (a.subject_id != b.subject_id) return a.subject_id < b.subject_id;
    return static_cast<int>(a.vowel) < static_cast<int>(b.vowel);
  });
  return entries;
}

// ---------------------------------------------------------------------------
// RIFF/WAVE.

namespace {

std::uint32_t read_u32(const unsigned char* p) {
  return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}
std::uint16_t read_u16(const unsigned char* p) {
  return static_cast<std::uint16_t>(p[0] | (p[1] << 8));
}

}  // namespace

WavContent wav_read(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open audio file: " + path);

  unsigned char hdr[12];
  if (!in.read(reinterpret_cast<char*>(hdr), 12) || std::memcmp(hdr, "RIFF", 4) != 0 ||
      std::memcmp(hdr + 8, "WAVE", 4) != 0) {
    throw InputError("not a RIFF/WAVE file: " + path);
  }

  int channels = 0, bits = 0;
  std::uint32_t rate = 0;
  std::uint16_t format = 0;
  std::vector<unsigned char> data;
  bool have_fmt = false, have_data = false;

  unsigned char chdr[8];
  while (in.read(reinterpret_cast<char*>(chdr), 8)) {
    const std::uint32_t size = read_u32(chdr + 4);
    if (std::memcmp(chdr, "fmt ", 4) == 0) {
      std::vector<unsigned char> fmt(size);
      if (!in.read(reinterpret_cast<char*>(fmt.data()), size) || size < 16) {
        throw InputError("corrupt fmt chunk: " + path);
      }
      format = read_u16(fmt.data());
      channels = read_u16(fmt.data() + 2);
      rate = read_u32(fmt.data() + 4);
      bits = read_u16(fmt.data() + 14);
      have_fmt = true;
    } else if (std::memcmp(chdr, "data", 4) == 0) {
      data.resize(size);
      if (!in.read(reinterpret_cast<char*>(data.data()), size)) {
        throw InputError("corrupt data chunk: " + path);
      }
      have_data = true;
    } else {
      in.seekg(size + (size & 1), std::ios::cur);  // chunks are word-aligned
    }
    if (size & 1 && std::memcmp(chdr, "data", 4) == 0) in.seekg(1, std::ios::cur);
  }

  if (!have_fmt || !have_data) throw InputError("missing fmt/data chunk: " + path);
  if (format != 1) throw InputError("unsupported encoding (need linear PCM): " + path);
  if (bits != 16) throw InputError("unsupported bit depth (need 16-bit): " + path);
  if (channels < 1 || channels > 2) throw InputError("unsupported channel count: " + path);
  if (rate == 0) throw InputError("zero sample rate: " + path);

  const std::size_t frame_bytes = static_cast<std::size_t>(channels) * 2;
  const std::size_t n = data.size() / frame_bytes;
  if (n == 0) throw InputError("zero-length audio: " + path);

  WavContent wc;
  wc.sample_rate = static_cast<double>(rate);
  wc.channels.assign(channels, std::vector<double>(n));
  for (std::size_t i = 0; i < n; ++i) {
    for (int c = 0; c < channels; ++c) {
      const unsigned char* p = data.data() + i * frame_bytes + c * 2;
      const std::int16_t s = static_cast<std::int16_t>(p[0] | (p[1] << 8));
      wc.channels[c][i] = static_cast<double>(s) / 32768.0;
    }
  }
  return wc;
}

void wav_write_pcm16(const std::string& path, std::span<const double> mono, double sample_rate) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write audio file: " + path);

  const std::uint32_t n = static_cast<std::uint32_t>(mono.size());
  const std::uint32_t data_bytes = n * 2;
  const std::uint32_t rate = static_cast<std::uint32_t>(std::lround(sample_rate));

  auto w32 = [&](std::uint32_t v) { out.write(reinterpret_cast<const char*>(&v), 4); };
  auto w16 = [&](std::uint16_t v) { out.write(reinterpret_cast<const char*>(&v), 2); };

  out.write("RIFF", 4);
  w32(36 + data_bytes);
  out.write("WAVE", 4);
  out.write("fmt ", 4);
  w32(16);
  w16(1);  // PCM
  w16(1);  // mono
  w32(rate);
  w32(rate * 2);
  w16(2);
  w16(16);
  out.write("data", 4);
  w32(data_bytes);
  for (double v : mono) {
    const double c = std::clamp(v, -1.0, 1.0);
    const std::int16_t s = static_cast<std::int16_t>(std::lround(c * 32767.0));
    out.write(reinterpret_cast<const char*>(&s), 2);
  }
}

// ---------------------------------------------------------------------------

VoiceRecording decode_recording(const ManifestEntry& entry) {
  WavContent wc = wav_read(entry.path);
  VoiceRecording rec;
  rec.sample_rate = wc.sample_rate;
  rec.subject_id = entry.subject_id;
  rec.vowel = entry.vowel;
  rec.label = entry.label;

  const std::size_t n = wc.channels[0].size();
  rec.samples.resize(n);
  if (wc.channels.size() == 1) {
    rec.samples = std::move(wc.channels[0]);
  } else {
    for (std::size_t i = 0; i < n; ++i) {
      rec.samples[i] = 0.5 * (wc.channels[0][i] + wc.channels[1][i]);
    }
  }
  return rec;
}

VoiceRecording resample(const VoiceRecording& rec, double target_rate) {
  if (target_rate <= 0) throw InputError("resample: target rate must be positive");
  if (target_rate == rec.sample_rate) return rec;
  VoiceRecording out = rec;
  out.samples = dsp::resample_sinc(rec.samples, rec.sample_rate, target_rate);
  out.sample_rate = target_rate;
  return out;
}

TrimResult trim_silence(const VoiceRecording& rec, double threshold_dbfs, double hangover_seconds) {
  const double fs = rec.sample_rate;
  const std::size_t win = std::max<std::size_t>(1, static_cast<std::size_t>(std::lround(0.010 * fs)));
  const double thresh_rms = std::pow(10.0, threshold_dbfs / 20.0);

  const std::size_t n = rec.samples.size();
  std::size_t first = n, last = 0;
  for (std::size_t start = 0; start < n; start += win) {
    const std::size_t end = std::min(n, start + win);
    double acc = 0.0;
    for (std::size_t i = start; i < end; ++i) acc += rec.samples[i] * rec.samples[i];
    const double rms = std::sqrt(acc / static_cast<double>(end - start));
    if (rms > thresh_rms) {
      if (first == n) first = start;
      last = end;
    }
  }

  TrimResult res;
  if (first >= last) {
    // Nothing above threshold; keep the signal untouched and let downstream
    // voicing checks flag it.
    res.rec = rec;
    return res;
  }

  const std::size_t hang = static_cast<std::size_t>(std::lround(hangover_seconds * fs));
  const std::size_t lo = (first > hang) ? first - hang : 0;
  const std::size_t hi = std::min(n, last + hang);

  res.rec = rec;
  res.rec.samples.assign(rec.samples.begin() + static_cast<long>(lo),
                         rec.samples.begin() + static_cast<long>(hi));
  res.lead_seconds = static_cast<double>(lo) / fs;
  res.tail_seconds = static_cast<double>(n - hi) / fs;
  return res;
}

}  // namespace vowelmark
