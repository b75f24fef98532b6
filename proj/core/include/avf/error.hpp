#pragma once

#include <stdexcept>
#include <string>

namespace avf {

// Base of every error raised by the library. The CLI prints what() as its
// one-line diagnostic.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

#define AVF_DEFINE_ERROR(Name)                   \
  class Name : public Error {                    \
   public:                                       \
    explicit Name(const std::string& what)       \
        : Error(std::string(#Name ": ") + what) {} \
  }

AVF_DEFINE_ERROR(InvalidArgument);
AVF_DEFINE_ERROR(DimMismatch);
AVF_DEFINE_ERROR(NonFiniteValue);
AVF_DEFINE_ERROR(NonDeterministicLoss);
AVF_DEFINE_ERROR(MissingForwardCache);

// audio
AVF_DEFINE_ERROR(UnsupportedFormat);
AVF_DEFINE_ERROR(CorruptHeader);
AVF_DEFINE_ERROR(ClipTooShort);
AVF_DEFINE_ERROR(GridTooFineForInput);

// training / pipeline
AVF_DEFINE_ERROR(EmptyDataset);
AVF_DEFINE_ERROR(InvalidConfig);
AVF_DEFINE_ERROR(NumericalDivergence);

// file formats
AVF_DEFINE_ERROR(IoError);
AVF_DEFINE_ERROR(CorruptMagic);
AVF_DEFINE_ERROR(TruncatedFile);
AVF_DEFINE_ERROR(DimOverflow);

#undef AVF_DEFINE_ERROR

}  // namespace avf
