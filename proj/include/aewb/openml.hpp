#pragma once

#include <memory>
#include <string>

namespace aewb {

/// HTTP GET abstraction so tests can inject canned responses.
class Transport {
 public:
  struct Response {
    int status = 0;       // 0 means transport-level failure
    std::string body;
    std::string error;    // transport failure description
  };
  virtual ~Transport() = default;
  virtual Response get(const std::string& url) = 0;
};

// Live HTTPS transport with a 60 s timeout.
std::unique_ptr<Transport> make_http_transport();

struct FetchOptions {
  int retries = 3;
  double backoff_seconds = 1.0;  // doubles per retry; zero in tests
};

// Resolves the dataset's ARFF URL through the OpenML JSON API, downloads it,
// and caches the bytes at <cache_dir>/openml/<id>.arff. A warm cache is
// returned without touching the network. Concurrent fetches of one id are
// serialized by a file lock.
std::string fetch_openml(int dataset_id, const std::string& cache_dir, Transport& transport,
                         const FetchOptions& opts = {});

// Cache location for a dataset id.
std::string openml_cache_path(const std::string& cache_dir, int dataset_id);

}  // namespace aewb
