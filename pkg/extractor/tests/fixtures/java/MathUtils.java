package com.example.util;

/**
 * Small numeric helpers.
 */
public final class MathUtils {

    /**
     * Clamps the value into the inclusive range.
     */
    public static int clamp(int value, int lo, int hi) {
        if (value < lo) {
            return lo;
        }
        if (value > hi) {
            return hi;
        }
        return value;
    }

    /**
     * Computes the greatest common divisor of two integers.
     */
    public static int gcd(int a, int b) {
        while (b != 0) {
            int t = b;
            b = a % b;
            a = t;
        }
        return a < 0 ? -a : a;
    }

    /**
     * Computes the least common multiple of two integers.
     */
    public static long lcm(int a, int b) {
        if (a == 0 || b == 0) {
            return 0;
        }
        return (long) a / gcd(a, b) * b;
    }

    /**
     * Returns the mean of the array values.
     */
    public static double mean(double[] values) {
        double total = 0.0;
        for (double v : values) {
            total += v;
        }
        return total / values.length;
    }

    /**
     * Returns the population variance of the values.
     */
    public static double variance(double[] values) {
        double mu = mean(values);
        double acc = 0.0;
        for (double v : values) {
            acc += (v - mu) * (v - mu);
        }
        return acc / values.length;
    }

    /**
     * Checks whether the number is a power of two.
     */
    public static boolean isPowerOfTwo(int n) {
        return n > 0 && (n & (n - 1)) == 0;
    }

    /**
     * Computes integer exponentiation by squaring.
     */
    public static long power(long base, int exp) {
        long result = 1;
        long b = base;
        int e = exp;
        while (e > 0) {
            if ((e & 1) == 1) {
                result *= b;
            }
            b *= b;
            e >>= 1;
        }
        return result;
    }

    /**
     * Returns the factorial of n for small inputs.
     */
    public static long factorial(int n) {
        long out = 1;
        for (int i = 2; i <= n; i++) {
            out *= i;
        }
        return out;
    }

    /**
     * Tests primality by trial division.
     */
    public static boolean isPrime(int n) {
        if (n < 2) {
            return false;
        }
        for (int i = 2; (long) i * i <= n; i++) {
            if (n % i == 0) {
                return false;
            }
        }
        return true;
    }

    /**
     * Rounds the value up to the next multiple of the step.
     */
    public static int roundUp(int value, int step) {
        int rem = value % step;
        if (rem == 0) {
            return value;
        }
        return value + step - rem;
    }

    /**
     * Returns the maximum of an integer array.
     */
    public static int max(int[] values) {
        int best = values[0];
        for (int i = 1; i < values.length; i++) {
            if (values[i] > best) {
                best = values[i];
            }
        }
        return best;
    }

    /**
     * Linearly interpolates between two values.
     */
    public static double lerp(double a, double b, double t) {
        return a + (b - a) * t;
    }

    /**
     * Sums the digits of a non-negative integer.
     */
    public static int digitSum(int n) {
        int total = 0;
        while (n > 0) {
            total += n % 10;
            n /= 10;
        }
        return total;
    }

    /**
     * Converts degrees to radians.
     */
    public static double toRadians(double degrees) {
        return degrees * Math.PI / 180.0;
    }
}
