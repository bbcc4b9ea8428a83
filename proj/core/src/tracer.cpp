#include "flowmap/tracer.hpp"

namespace flowmap {

void TraceConfig::validate() const {
  if (!(step > 0.0)) throw InvalidArgument("trace step must be > 0");
  if (interval < 1) throw InvalidArgument("interval must be >= 1");
  if (file_cycles < 1) throw InvalidArgument("file cycle count must be >= 1");
  if (samples_per_map < 1) throw InvalidArgument("samples per map must be >= 1");
}

}  // namespace flowmap
