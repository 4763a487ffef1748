#include "loadclean/error.hpp"

namespace loadclean {

void rethrow_with_context(const Error& e, const std::string& prefix) {
  const std::string msg = prefix + ": " + e.what();
  if (dynamic_cast<const NoPeriodicity*>(&e)) throw NoPeriodicity(msg);
  if (dynamic_cast<const NumericFailure*>(&e)) throw NumericFailure(msg);
  if (dynamic_cast<const StrategyInapplicable*>(&e)) throw StrategyInapplicable(msg);
  if (dynamic_cast<const InvalidInput*>(&e)) throw InvalidInput(msg);
  throw Error(msg);
}

}  // namespace loadclean
