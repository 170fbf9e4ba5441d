package com.example.io;

import java.io.BufferedReader;
import java.io.File;
import java.io.FileReader;
import java.io.IOException;
import java.util.ArrayList;
import java.util.List;

/**
 * Light file-system helpers.
 */
public final class FileHelper {

    /**
     * Reads the whole file into a list of lines.
     */
    public static List<String> readLines(String path) throws IOException {
        List<String> lines = new ArrayList<String>();
        BufferedReader reader = new BufferedReader(new FileReader(path));
        try {
            String line = reader.readLine();
            while (line != null) {
                lines.add(line);
                line = reader.readLine();
            }
        } finally {
            reader.close();
        }
        return lines;
    }

    /**
     * Returns the lowercase extension of a file name.
     */
    public static String extensionOf(String name) {
        int dot = name.lastIndexOf('.');
        if (dot < 0 || dot == name.length() - 1) {
            return "";
        }
        return name.substring(dot + 1).toLowerCase();
    }

    /**
     * Joins path segments with a forward slash.
     */
    public static String joinPath(String base, String child) {
        if (base.endsWith("/")) {
            return base + child;
        }
        return base + "/" + child;
    }

    /**
     * Checks whether the path points at a readable file.
     */
    public static boolean isReadableFile(String path) {
        File f = new File(path);
        return f.isFile() && f.canRead();
    }

    /**
     * Counts the files directly under a directory.
     */
    public static int countFiles(File dir) {
        File[] entries = dir.listFiles();
        if (entries == null) {
            return 0;
        }
        int total = 0;
        for (File entry : entries) {
            if (entry.isFile()) {
                total++;
            }
        }
        return total;
    }

    /**
     * Returns the base name of the path without directories.
     */
    public static String baseName(String path) {
        int slash = path.lastIndexOf('/');
        return slash < 0 ? path : path.substring(slash + 1);
    }

    /**
     * Strips a UTF-8 byte order mark from the start of the text.
     */
    public static String stripBom(String text) {
        if (!text.isEmpty() && text.charAt(0) == '﻿') {
            return text.substring(1);
        }
        return text;
    }

    /**
     * Counts the non-empty lines in the file.
     */
    public static int countNonEmptyLines(String path) throws IOException {
        int total = 0;
        for (String line : readLines(path)) {
            if (!line.trim().isEmpty()) {
                total++;
            }
        }
        return total;
    }

    /**
     * Returns a human readable size with a binary unit suffix.
     */
    public static String humanSize(long bytes) {
        String[] units = {"B", "KiB", "MiB", "GiB"};
        double value = bytes;
        int unit = 0;
        while (value >= 1024.0 && unit < units.length - 1) {
            value /= 1024.0;
            unit++;
        }
        return String.format("%.1f %s", value, units[unit]);
    }

    /**
     * Checks whether a file name is hidden by convention.
     */
    public static boolean isHidden(String name) {
        return name.startsWith(".") && name.length() > 1;
    }
}
