#include "aewb/openml.hpp"

#include <fcntl.h>
#include <sys/file.h>
#include <unistd.h>

#include <chrono>
#include <filesystem>
#include <fstream>
#include <thread>

#include "aewb/errors.hpp"
#include "httplib.h"
#include "json.hpp"

namespace aewb {

namespace {

namespace fs = std::filesystem;

struct UrlParts {
  std::string scheme_host;  // e.g. https://www.openml.org
  std::string path;
};

UrlParts split_url(const std::string& url) {
  const size_t scheme = url.find("://");
  if (scheme == std::string::npos) throw FetchError("malformed url: " + url);
  const size_t path_start = url.find('/', scheme + 3);
  if (path_start == std::string::npos) return {url, "/"};
  return {url.substr(0, path_start), url.substr(path_start)};
}

class HttpTransport : public Transport {
 public:
  Response get(const std::string& url) override {
    const UrlParts parts = split_url(url);
#ifndef CPPHTTPLIB_OPENSSL_SUPPORT
    if (parts.scheme_host.rfind("https://", 0) == 0)
      return {0, "", "built without TLS support; cannot fetch " + url};
#endif
    httplib::Client client(parts.scheme_host);
    client.set_connection_timeout(60, 0);
    client.set_read_timeout(60, 0);
    client.set_follow_location(true);
    auto res = client.Get(parts.path);
    if (!res) return {0, "", httplib::to_string(res.error())};
    return {res->status, res->body, ""};
  }
};

Transport::Response get_with_retries(Transport& transport, const std::string& url,
                                     const FetchOptions& opts) {
  Transport::Response last;
  double delay = opts.backoff_seconds;
  for (int attempt = 0; attempt <= opts.retries; ++attempt) {
    if (attempt > 0 && delay > 0) {
      std::this_thread::sleep_for(std::chrono::duration<double>(delay));
      delay *= 2;
    }
    last = transport.get(url);
    if (last.status == 200) return last;
    if (last.status == 404) return last;  // retrying cannot help
  }
  return last;
}

// RAII flock on <path>; serializes concurrent fetches of one dataset id.
class FileLock {
 public:
  explicit FileLock(const std::string& path) {
    fd_ = ::open(path.c_str(), O_CREAT | O_RDWR, 0644);
    if (fd_ < 0) throw IoError("cannot open lock file: " + path);
    if (::flock(fd_, LOCK_EX) != 0) {
      ::close(fd_);
      throw IoError("cannot lock: " + path);
    }
  }
  ~FileLock() {
    ::flock(fd_, LOCK_UN);
    ::close(fd_);
  }
  FileLock(const FileLock&) = delete;
  FileLock& operator=(const FileLock&) = delete;

 private:
  int fd_;
};

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return bytes;
}

}  // namespace

std::unique_ptr<Transport> make_http_transport() { return std::make_unique<HttpTransport>(); }

std::string openml_cache_path(const std::string& cache_dir, int dataset_id) {
  return (fs::path(cache_dir) / "openml" / (std::to_string(dataset_id) + ".arff")).string();
}

std::string fetch_openml(int dataset_id, const std::string& cache_dir, Transport& transport,
                         const FetchOptions& opts) {
  if (dataset_id <= 0)
    throw FetchError("dataset id " + std::to_string(dataset_id) + " not found");

  const fs::path cache_file = openml_cache_path(cache_dir, dataset_id);
  if (fs::exists(cache_file)) return read_file(cache_file);

  fs::create_directories(cache_file.parent_path());
  FileLock lock(cache_file.string() + ".lock");
  if (fs::exists(cache_file)) return read_file(cache_file);  // raced another fetch

  const std::string desc_url =
      "https://www.openml.org/api/v1/json/data/" + std::to_string(dataset_id);
  auto desc = get_with_retries(transport, desc_url, opts);
  if (desc.status == 404)
    throw FetchError("dataset id " + std::to_string(dataset_id) + " not found");
  if (desc.status != 200)
    throw FetchError("openml description request failed (" +
                     (desc.status ? "http " + std::to_string(desc.status) : desc.error) +
                     "): " + desc_url);

  std::string arff_url;
  try {
    const auto j = nlohmann::json::parse(desc.body);
    arff_url = j.at("data_set_description").at("url").get<std::string>();
  } catch (const nlohmann::json::exception& e) {
    throw FetchError(std::string("unexpected openml description payload: ") + e.what());
  }

  auto arff = get_with_retries(transport, arff_url, opts);
  if (arff.status != 200)
    throw FetchError("openml download failed (" +
                     (arff.status ? "http " + std::to_string(arff.status) : arff.error) +
                     "): " + arff_url);

  const fs::path tmp = cache_file.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out) throw IoError("cannot write cache file: " + tmp.string());
    out.write(arff.body.data(), static_cast<std::streamsize>(arff.body.size()));
    if (!out) throw IoError("cache write failed: " + tmp.string());
  }
  fs::rename(tmp, cache_file);
  return arff.body;
}

}  // namespace aewb
