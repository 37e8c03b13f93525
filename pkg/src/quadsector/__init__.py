"""Prime ideals in sectors of real quadratic fields: exact arithmetic, Hecke
characters, Vaughan decompositions, large-sieve bounds and Bombieri-Vinogradov
error averages."""

__version__ = "0.1.0"
