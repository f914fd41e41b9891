#ifndef PKECD_H
#define PKECD_H

/* Generated with cbindgen:0.27.0 */

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Bob's basis guess as reported by the reading calls.
 */
typedef enum PkecdBasis {
  PKECD_BASIS_COMPUTATIONAL = 0,
  PKECD_BASIS_HADAMARD = 1,
} PkecdBasis;

/**
 * Which error-qubit basis distribution to use.
 */
typedef enum PkecdErrorMode {
  PKECD_ERROR_MODE_BLOCH = 0,
  PKECD_ERROR_MODE_CONJUGATE = 1,
} PkecdErrorMode;

/**
 * Result codes.
 */
typedef enum PkecdStatus {
  PKECD_STATUS_OK = 0,
  PKECD_STATUS_NULL_POINTER = 1,
  PKECD_STATUS_INVALID_ARGUMENT = 2,
  PKECD_STATUS_ALREADY_CONSUMED = 3,
  PKECD_STATUS_LENGTH_MISMATCH = 4,
  /**
   * Decoding or decryption produced no plaintext. Not an API error.
   */
  PKECD_STATUS_DECRYPT_FAILED = 5,
  PKECD_STATUS_BUFFER_TOO_SMALL = 6,
  PKECD_STATUS_IO = 7,
  PKECD_STATUS_FORMAT = 8,
  PKECD_STATUS_PANIC = 99,
} PkecdStatus;

typedef struct PkecdBundle PkecdBundle;

typedef struct PkecdKeyPair PkecdKeyPair;

typedef struct PkecdRecord PkecdRecord;

typedef struct PkecdReturned PkecdReturned;

typedef struct PkecdRng PkecdRng;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Library version as a static nul-terminated string.
 */
const char *pkecd_version(void);

/**
 * Message for the last failed call on this thread, or null. Valid until the
 * next failing call on the same thread.
 */
const char *pkecd_last_error_message(void);

struct PkecdRng *pkecd_rng_new(uint64_t seed);

void pkecd_rng_free(struct PkecdRng *rng);

/**
 * Toy PKE key pair with `block_bits`-bit ciphertexts and `plaintext_bits`-bit messages.
 */
enum PkecdStatus pkecd_keypair_generate(uint32_t block_bits,
                                        uint32_t plaintext_bits,
                                        struct PkecdRng *rng,
                                        struct PkecdKeyPair **out);

void pkecd_keypair_free(struct PkecdKeyPair *kp);

/**
 * Encrypts `msg` (`msg_len` bytes of 0/1) under `code_name`, e.g. `"bch-31-16-7"`.
 * `error_count < 0` means the code's correction radius.
 */
enum PkecdStatus pkecd_encrypt(const struct PkecdKeyPair *kp,
                               const char *code_name,
                               const uint8_t *msg,
                               size_t msg_len,
                               enum PkecdErrorMode error_mode,
                               int32_t error_count,
                               struct PkecdRng *rng,
                               struct PkecdBundle **out_bundle,
                               struct PkecdRecord **out_record);

void pkecd_bundle_free(struct PkecdBundle *bundle);

/**
 * 1 if the bundle's register has been used up, 0 if not, -1 for null.
 */
int32_t pkecd_bundle_is_consumed(const struct PkecdBundle *bundle);

/**
 * Honest reading with a random basis guess. Consumes the bundle. Returns
 * `DECRYPT_FAILED` (with `*out_len = 0`) when nothing decodes.
 */
enum PkecdStatus pkecd_bob_decrypt(const struct PkecdKeyPair *kp,
                                   struct PkecdBundle *bundle,
                                   struct PkecdRng *rng,
                                   uint8_t *out_bits,
                                   size_t capacity,
                                   size_t *out_len,
                                   enum PkecdBasis *out_guess);

/**
 * Hands the untouched register back. Consumes the bundle.
 */
enum PkecdStatus pkecd_bob_delete(struct PkecdBundle *bundle, struct PkecdReturned **out);

/**
 * Reads like [`pkecd_bob_decrypt`], then returns the collapsed register as a
 * forged certificate in `*out_returned`.
 */
enum PkecdStatus pkecd_cheat_measure_forge(const struct PkecdKeyPair *kp,
                                           struct PkecdBundle *bundle,
                                           struct PkecdRng *rng,
                                           uint8_t *out_bits,
                                           size_t capacity,
                                           size_t *out_len,
                                           enum PkecdBasis *out_guess,
                                           struct PkecdReturned **out_returned);

void pkecd_returned_free(struct PkecdReturned *returned);

/**
 * Alice's check of a returned register; `*out_accepted` is 1 or 0.
 */
enum PkecdStatus pkecd_alice_verify(const struct PkecdRecord *record,
                                    const struct PkecdReturned *returned,
                                    struct PkecdRng *rng,
                                    int32_t *out_accepted);

void pkecd_record_free(struct PkecdRecord *record);

/**
 * Record as JSON; release with [`pkecd_string_free`].
 */
enum PkecdStatus pkecd_record_to_json(const struct PkecdRecord *record, char **out);

enum PkecdStatus pkecd_record_from_json(const char *json, struct PkecdRecord **out);

void pkecd_string_free(char *s);

/**
 * Writes an unconsumed bundle to a `.qreg` file.
 */
enum PkecdStatus pkecd_bundle_write(const struct PkecdBundle *bundle, const char *path);

enum PkecdStatus pkecd_bundle_read(const char *path, struct PkecdBundle **out);

enum PkecdStatus pkecd_returned_write(const struct PkecdReturned *returned, const char *path);

enum PkecdStatus pkecd_returned_read(const char *path, struct PkecdReturned **out);

/**
 * Seal tradeoff bounds for reading probability `p` and `m` message bits.
 */
enum PkecdStatus pkecd_seal_bounds(double p, uint64_t m, double *out_p_dist, double *out_p_nfp);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* PKECD_H */
