// C never learns n: reading it from a state record must not compile.
#include "HigherLower_C.hpp"

namespace C = rmpst_gen::HigherLower_C;

int peek(const C::State2& st) {
#ifdef RMPST_ERASED_OK
  return static_cast<int>(st.x);
#else
  return static_cast<int>(st.n);
#endif
}

int main() { return peek(C::State2{1}) == 1 ? 0 : 1; }
