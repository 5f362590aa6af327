#include <zlib.h>

#include <algorithm>
#include <cstring>
#include <filesystem>
#include <fstream>

#include "mtsmt/common.hpp"
#include "mtsmt/error.hpp"
#include "mtsmt/harness.hpp"

#ifdef MTSMT_HAVE_CURL
#include <curl/curl.h>
#endif

namespace fs = std::filesystem;

namespace mtsmt::harness {

namespace {

constexpr const char* kRelease = "v3";

std::pair<std::string, std::string> validate_pair(const std::string& pair) {
  const auto dash = pair.find('-');
  if (dash == std::string::npos)
    throw Error("invalid language pair '" + pair + "': expected e.g. pl-en");
  std::string a = pair.substr(0, dash), b = pair.substr(dash + 1);
  auto ok = [](const std::string& s) {
    if (s.size() < 2 || s.size() > 3) return false;
    return std::all_of(s.begin(), s.end(),
                       [](char c) { return c >= 'a' && c <= 'z'; });
  };
  if (!ok(a) || !ok(b) || a == b)
    throw Error("invalid language pair '" + pair + "': expected e.g. pl-en");
  if (a > b) std::swap(a, b);  // OPUS names pairs alphabetically
  return {a, b};
}

std::uint32_t rd32(const unsigned char* p) {
  return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) |
         (static_cast<std::uint32_t>(p[3]) << 24);
}

std::uint16_t rd16(const unsigned char* p) {
  return static_cast<std::uint16_t>(p[0] | (p[1] << 8));
}

std::vector<unsigned char> read_binary(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path);
  return std::vector<unsigned char>(std::istreambuf_iterator<char>(in),
                                    std::istreambuf_iterator<char>());
}

std::vector<unsigned char> inflate_raw(const unsigned char* data,
                                       std::size_t size,
                                       std::size_t expected) {
  std::vector<unsigned char> out(expected);
  z_stream zs;
  std::memset(&zs, 0, sizeof(zs));
  if (inflateInit2(&zs, -MAX_WBITS) != Z_OK)
    throw Error("zlib initialization failed");
  zs.next_in = const_cast<unsigned char*>(data);
  zs.avail_in = static_cast<uInt>(size);
  zs.next_out = out.data();
  zs.avail_out = static_cast<uInt>(out.size());
  const int rc = inflate(&zs, Z_FINISH);
  inflateEnd(&zs);
  if (rc != Z_STREAM_END)
    throw FormatError("zip entry: corrupt deflate stream (zlib rc " +
                      std::to_string(rc) + ")");
  out.resize(zs.total_out);
  return out;
}

}  // namespace

std::vector<std::string> unzip_to(const std::string& zip_path,
                                  const std::string& out_dir) {
  const std::vector<unsigned char> buf = read_binary(zip_path);
  // Locate the end-of-central-directory record.
  if (buf.size() < 22) throw FormatError("not a zip file: " + zip_path);
  std::size_t eocd = std::string::npos;
  const std::size_t scan_from = buf.size() >= 22 + 65536 ? buf.size() - 22 - 65536 : 0;
  for (std::size_t i = buf.size() - 22 + 1; i-- > scan_from;) {
    if (buf[i] == 'P' && buf[i + 1] == 'K' && buf[i + 2] == 5 && buf[i + 3] == 6) {
      eocd = i;
      break;
    }
  }
  if (eocd == std::string::npos)
    throw FormatError("zip: end-of-central-directory record not found");
  const std::uint16_t entries = rd16(&buf[eocd + 10]);
  std::size_t cd = rd32(&buf[eocd + 16]);

  fs::create_directories(out_dir);
  std::vector<std::string> written;
  for (std::uint16_t e = 0; e < entries; ++e) {
    if (cd + 46 > buf.size() || rd32(&buf[cd]) != 0x02014b50)
      throw FormatError("zip: bad central directory entry", cd);
    const std::uint16_t method = rd16(&buf[cd + 10]);
    const std::uint32_t crc = rd32(&buf[cd + 16]);
    const std::uint32_t comp_size = rd32(&buf[cd + 20]);
    const std::uint32_t uncomp_size = rd32(&buf[cd + 24]);
    const std::uint16_t name_len = rd16(&buf[cd + 28]);
    const std::uint16_t extra_len = rd16(&buf[cd + 30]);
    const std::uint16_t comment_len = rd16(&buf[cd + 32]);
    const std::uint32_t local_offset = rd32(&buf[cd + 42]);
    const std::string name(reinterpret_cast<const char*>(&buf[cd + 46]), name_len);
    cd += 46u + name_len + extra_len + comment_len;

    if (!name.empty() && name.back() == '/') continue;  // directory entry
    if (local_offset + 30 > buf.size() || rd32(&buf[local_offset]) != 0x04034b50)
      throw FormatError("zip: bad local header for " + name, local_offset);
    const std::uint16_t lname = rd16(&buf[local_offset + 26]);
    const std::uint16_t lextra = rd16(&buf[local_offset + 28]);
    const std::size_t data_start = local_offset + 30u + lname + lextra;
    if (data_start + comp_size > buf.size())
      throw FormatError("zip: truncated entry " + name, data_start);

    std::vector<unsigned char> content;
    if (method == 0) {
      content.assign(buf.begin() + static_cast<long>(data_start),
                     buf.begin() + static_cast<long>(data_start + comp_size));
    } else if (method == 8) {
      content = inflate_raw(&buf[data_start], comp_size, uncomp_size);
    } else {
      throw FormatError("zip: unsupported compression method " +
                        std::to_string(method) + " for " + name);
    }
    const auto actual_crc =
        crc32(0L, content.data(), static_cast<uInt>(content.size()));
    if (actual_crc != crc)
      throw Error("zip: checksum mismatch for " + name);

    const std::string base = fs::path(name).filename().string();
    const std::string out_path = (fs::path(out_dir) / base).string();
    std::ofstream out(out_path, std::ios::binary);
    if (!out) throw Error("cannot write " + out_path);
    out.write(reinterpret_cast<const char*>(content.data()),
              static_cast<std::streamsize>(content.size()));
    written.push_back(out_path);
  }
  std::sort(written.begin(), written.end());
  return written;
}

std::string emea_url(const std::string& pair) {
  const auto [a, b] = validate_pair(pair);
  return "https://object.pouta.csc.fi/OPUS-EMEA/" + std::string(kRelease) +
         "/moses/" + a + "-" + b + ".txt.zip";
}

namespace {

#ifdef MTSMT_HAVE_CURL
std::size_t curl_sink(char* ptr, std::size_t size, std::size_t nmemb, void* ud) {
  auto* out = static_cast<std::ofstream*>(ud);
  out->write(ptr, static_cast<std::streamsize>(size * nmemb));
  return size * nmemb;
}
#endif

void download(const std::string& url, const std::string& dest) {
#ifdef MTSMT_HAVE_CURL
  std::ofstream out(dest, std::ios::binary);
  if (!out) throw Error("cannot write " + dest);
  CURL* curl = curl_easy_init();
  if (!curl) throw Error("curl initialization failed");
  curl_easy_setopt(curl, CURLOPT_URL, url.c_str());
  curl_easy_setopt(curl, CURLOPT_FOLLOWLOCATION, 1L);
  curl_easy_setopt(curl, CURLOPT_WRITEFUNCTION, curl_sink);
  curl_easy_setopt(curl, CURLOPT_WRITEDATA, &out);
  curl_easy_setopt(curl, CURLOPT_FAILONERROR, 1L);
  const CURLcode rc = curl_easy_perform(curl);
  long status = 0;
  curl_easy_getinfo(curl, CURLINFO_RESPONSE_CODE, &status);
  curl_easy_cleanup(curl);
  if (rc != CURLE_OK)
    throw Error("download failed: " + std::string(curl_easy_strerror(rc)) +
                " (HTTP " + std::to_string(status) + ") for " + url);
#else
  (void)dest;
  throw Error("this build has no libcurl; cannot download " + url);
#endif
}

}  // namespace

FetchResult fetch_emea(const std::string& target_dir, const std::string& pair) {
  const auto [a, b] = validate_pair(pair);
  const std::string url = emea_url(pair);
  fs::create_directories(target_dir);
  const std::string zip_path =
      (fs::path(target_dir) / (a + "-" + b + ".txt.zip")).string();
  download(url, zip_path);
  const std::vector<std::string> files = unzip_to(zip_path, target_dir);

  FetchResult r;
  for (const auto& f : files) {
    if (f.size() > a.size() + 1 && f.ends_with("." + a)) r.src_path = f;
    if (f.size() > b.size() + 1 && f.ends_with("." + b)) r.tgt_path = f;
  }
  if (r.src_path.empty() || r.tgt_path.empty())
    throw Error("EMEA archive did not contain ." + a + " and ." + b + " files");
  const auto src_lines = read_lines(r.src_path);
  const auto tgt_lines = read_lines(r.tgt_path);
  if (src_lines.size() != tgt_lines.size())
    throw Error("EMEA sides differ in line count: " +
                std::to_string(src_lines.size()) + " vs " +
                std::to_string(tgt_lines.size()));
  r.line_count = src_lines.size();
  r.release = kRelease;
  std::ofstream meta((fs::path(target_dir) / "emea.meta").string());
  meta << "release\t" << kRelease << "\npair\t" << a << "-" << b
       << "\nlines\t" << r.line_count << '\n';
  return r;
}

}  // namespace mtsmt::harness
